"""Command-line front end.

Subcommands: ``simulate``, ``exact``, ``theory``, ``compare``, ``enumerate``.
Exit codes: 0 success, 1 internal error, 2 usage, 3 resource guard,
4 acceptance band violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from lcdlab import exact, oracle, theory
from lcdlab.distributions import distribution_csv, edge_list_text
from lcdlab.errors import GuardError
from lcdlab.harness import SCHEMA_VERSION, Bands, compare_report, replica_rng, run_replicas
from lcdlab.plot import Series, loglog_svg
from lcdlab.process import ProcessParams, generate

log = logging.getLogger("lcdlab")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_GUARD, EXIT_BAND = 0, 1, 2, 3, 4
MAX_RATIONAL_T = 200
MAX_ROUTE_CHECK_T = 60
MAX_FLOAT_T = 10_000_000

_BOOL_FLAGS = {"check_routes", "pairings", "timing"}


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _entry_value(v):
    if isinstance(v, Fraction):
        return {"numerator": v.numerator, "denominator": v.denominator}
    return float(v)


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    params = ProcessParams(args.m, args.n, args.seed)
    report = run_replicas(params, args.replicas, workers=args.workers)
    _write(args.out, distribution_csv(report.distribution(), rational=False))
    if args.report:
        Path(args.report).write_text(report.to_json(timing=args.timing))
    if args.edges:
        g = generate(params, replica_rng(params.seed, 0))
        Path(args.edges).write_text(edge_list_text(g))
    return EXIT_OK


def cmd_exact(args) -> int:
    rational = args.mode == "rational"
    if rational and args.T > MAX_RATIONAL_T:
        raise GuardError(f"--T {args.T} exceeds {MAX_RATIONAL_T} in rational mode")
    if args.T > MAX_FLOAT_T:
        raise GuardError(f"--T {args.T} exceeds {MAX_FLOAT_T}")
    if args.check_routes and args.T > MAX_ROUTE_CHECK_T:
        raise GuardError(f"--check-routes is limited to --T <= {MAX_ROUTE_CHECK_T}")
    kmax = args.kmax if args.kmax is not None else args.m + 60
    dist = exact.network_degree(args.T, args.m, kmax, args.mode)
    _write(args.out, distribution_csv(dist, rational=rational))
    report = {
        "schema_version": SCHEMA_VERSION,
        "m": args.m,
        "T": args.T,
        "mode": args.mode,
        "kmax": kmax,
        "truncated_mass": _entry_value(dist.truncated_mass),
        "entries": [{"k": k, "value": _entry_value(v)} for k, v in dist.entries.items()],
    }
    if args.check_routes:
        fp = exact.network_degree_fp(args.T, args.m, kmax, args.mode)
        diffs = [abs(fp[k] - dist[k]) for k in dist.entries]
        diffs.append(abs(fp.truncated_mass - dist.truncated_mass))
        worst = max(diffs)
        report["route_discrepancy"] = _entry_value(worst)
        if args.routes_out:
            Path(args.routes_out).write_text(distribution_csv(fp, rational=rational))
    if args.report:
        Path(args.report).write_text(_dump_json(report))
    return EXIT_OK


def cmd_theory(args) -> int:
    kmax = args.kmax if args.kmax is not None else args.m + 60
    if kmax < args.m:
        raise ValueError(f"--kmax {kmax} is below --m {args.m}")
    table = theory.recursion_table(args.m, kmax, args.mode)
    _write(args.out, distribution_csv(table, rational=args.mode == "rational"))
    if args.report:
        report = {
            "schema_version": SCHEMA_VERSION,
            "m": args.m,
            "mode": args.mode,
            "kmax": kmax,
            "truncated_mass": _entry_value(table.truncated_mass),
            "entries": [{"k": k, "value": _entry_value(v)} for k, v in table.entries.items()],
        }
        Path(args.report).write_text(_dump_json(report))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    if args.pairings:
        law = oracle.enumerate_pairings(args.T, args.m)
    else:
        law = oracle.enumerate_process(args.m, args.T)
    _write(args.out, law.to_json())
    return EXIT_OK


def cmd_compare(args) -> int:
    params = ProcessParams(args.m, args.n, args.seed)
    bands = Bands(
        head_k_max=args.head_kmax,
        head_tol=args.head_tol,
        fit_k_min=args.fit_min if args.fit_min is not None else 10 * args.m,
        fit_k_max=args.fit_max,
        slope_lo=args.slope_lo,
        slope_hi=args.slope_hi,
        chi2_p_min=args.chi2_pmin,
    )
    report = run_replicas(params, args.replicas, workers=args.workers)
    kmax = args.kmax if args.kmax is not None else max(args.m + 60, bands.fit_k_max)
    exact_dist = None
    if args.n <= MAX_FLOAT_T:
        exact_dist = exact.network_degree(args.n, args.m, kmax, "float64")
    else:
        log.warning("skipping exact P(k,T): T=%d above %d", args.n, MAX_FLOAT_T)
    cmp = compare_report(report, exact_dist, args.m, bands)
    _write(args.out, cmp.summary_csv())
    if args.report:
        Path(args.report).write_text(cmp.to_json())
    if args.plot:
        rows = [r for r in cmp.rows if r["k"] <= kmax]
        series = [
            Series("theory", [r["k"] for r in rows], [r["theory"] for r in rows], "black", marker=False),
            Series("empirical", [r["k"] for r in rows], [r["empirical"] for r in rows], "blue"),
        ]
        if exact_dist is not None:
            series.insert(1, Series("exact P(k,T)", [r["k"] for r in rows if r["exact"] is not None],
                                    [r["exact"] for r in rows if r["exact"] is not None], "red", marker=False))
        title = f"LCD degree distribution, m={args.m}, n={args.n}, R={args.replicas}"
        Path(args.plot).write_text(loglog_svg(series, title))
    verdict = "PASS" if cmp.passed else "FAIL"
    print(f"{verdict} " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in cmp.checks.items()),
          file=sys.stderr)
    return EXIT_OK if cmp.passed else EXIT_BAND


# -- parsing -----------------------------------------------------------------


def _positive(name):
    def conv(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} expects an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {value}")
        return value
    return conv


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"--seed must be in [0, 2^64), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcdlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, horizon):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--m", type=_positive("--m"), default=1)
        if horizon == "n":
            p.add_argument("--n", type=_positive("--n"), default=1000)
        else:
            p.add_argument("--T", type=_positive("--T"), default=100)
        p.add_argument("--out", help="primary output file (default: stdout)")

    p = sub.add_parser("simulate", help="Monte Carlo replicas of G_m^n")
    common(p, "n")
    p.add_argument("--replicas", type=_positive("--replicas"), default=10)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive("--workers"), default=1)
    p.add_argument("--report", help="ReplicaReport JSON path")
    p.add_argument("--edges", help="edge list of replica 0")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact network degree P(k,T)")
    common(p, "T")
    p.add_argument("--kmax", type=_positive("--kmax"))
    p.add_argument("--mode", choices=["float64", "rational"], default="float64")
    p.add_argument("--check-routes", action="store_true", help="also run the first-passage route")
    p.add_argument("--routes-out", help="CSV of the first-passage route")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("theory", help="closed-form stationary distribution")
    p.add_argument("--config")
    p.add_argument("--m", type=_positive("--m"), default=1)
    p.add_argument("--kmax", type=_positive("--kmax"))
    p.add_argument("--mode", choices=["float64", "rational"], default="float64")
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("enumerate", help="brute-force exact law at tiny sizes")
    common(p, "T")
    p.add_argument("--pairings", action="store_true", help="enumerate chord diagrams instead")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("compare", help="replicas vs exact engine vs theory, with bands")
    common(p, "n")
    p.add_argument("--replicas", type=_positive("--replicas"), default=30)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive("--workers"), default=1)
    p.add_argument("--kmax", type=_positive("--kmax"))
    p.add_argument("--head-kmax", type=_positive("--head-kmax"), default=5)
    p.add_argument("--head-tol", type=float, default=0.01)
    p.add_argument("--fit-min", type=_positive("--fit-min"))
    p.add_argument("--fit-max", type=_positive("--fit-max"), default=60)
    p.add_argument("--slope-lo", type=float, default=-3.2)
    p.add_argument("--slope-hi", type=float, default=-2.8)
    p.add_argument("--chi2-pmin", type=float)
    p.add_argument("--report")
    p.add_argument("--plot", help="SVG log-log plot path")
    p.set_defaults(func=cmd_compare)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    command = next((a for a in argv if not a.startswith("-")), None)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if command not in subs.choices:
        return
    sp = subs.choices[command]
    dests = {a.dest for a in sp._actions}
    unknown = set(cfg) - dests
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in cfg.items():
        if key in _BOOL_FLAGS:
            sp.set_defaults(**{key: value.lower() in ("1", "true", "yes", "on")})
        else:
            sp.set_defaults(**{key: value})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except (OSError, ValueError) as exc:
        print(f"lcdlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"lcdlab: guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"lcdlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
