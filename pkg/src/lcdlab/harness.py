"""Seeded replicas and three-way comparison: Monte Carlo vs exact engine vs theory.

Replica ``r`` of a run with seed ``s`` draws from ``PCG64(SeedSequence(s,
spawn_key=(r,)))``; the seed sequence hashes ``(s, r)`` into independent
streams, so results do not depend on how replicas are spread over workers.
The per-replica degree fractions have expectation ``P(k, T)`` (the average
over vertices of ``P(k, I, T)``), which is what the exact engine computes.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from lcdlab.distributions import DegreeDistribution, format_float
from lcdlab.errors import GuardError
from lcdlab.process import ProcessParams, generate
from lcdlab.theory import closed_form, tail_exponent_fit

SCHEMA_VERSION = 1
MAX_TOTAL_EDGES = 5_000_000_000  # guard on replicas * m * n


def replica_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))


def _replica_counts(args) -> np.ndarray:
    params, r = args
    g = generate(params, replica_rng(params.seed, r))
    return np.bincount(g.degrees)


@dataclass
class ReplicaReport:
    params: ProcessParams
    replicas: int
    ks: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray  # vertex counts pooled over replicas
    duration: float = 0.0

    def distribution(self) -> DegreeDistribution:
        return DegreeDistribution(
            {int(k): float(v) for k, v in zip(self.ks, self.mean) if v > 0}, "frequency"
        )

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "params": {**asdict(self.params), "numeric_mode": self.params.numeric_mode.value},
            "replicas": self.replicas,
            "rng": "PCG64 / SeedSequence(seed, spawn_key=(replica,))",
            "rows": [
                {"k": int(k), "mean": float(mu), "std": float(sd), "stderr": float(se), "count": int(c)}
                for k, mu, sd, se, c in zip(self.ks, self.mean, self.std, self.stderr, self.counts)
            ],
        }
        if timing:
            out["duration_s"] = self.duration
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"


def summarize(params: ProcessParams, histograms: list[np.ndarray], duration: float = 0.0) -> ReplicaReport:
    """Aggregate per-replica degree histograms (kept in replica order)."""
    R = len(histograms)
    width = max(len(h) for h in histograms)
    counts = np.zeros((R, width), dtype=np.int64)
    for i, h in enumerate(histograms):
        counts[i, : len(h)] = h
    pooled = counts.sum(axis=0)
    ks = np.flatnonzero(pooled)
    freq = counts[:, ks] / params.n
    mean = freq.sum(axis=0) / R
    std = freq.std(axis=0, ddof=1) if R > 1 else np.zeros(len(ks))
    return ReplicaReport(params, R, ks, mean, std, std / math.sqrt(R), pooled[ks], duration)


def run_replicas(params: ProcessParams, replicas: int, workers: int = 1) -> ReplicaReport:
    """Run ``generate`` once per replica and aggregate the degree histograms."""
    if replicas < 2:
        raise ValueError(f"need at least 2 replicas, got {replicas}")
    if replicas * params.m * params.n > MAX_TOTAL_EDGES:
        raise GuardError(
            f"replicas*m*n = {replicas * params.m * params.n} exceeds the limit {MAX_TOTAL_EDGES}"
        )
    start = time.perf_counter()
    jobs = [(params, r) for r in range(replicas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hists = list(pool.map(_replica_counts, jobs, chunksize=max(1, replicas // (4 * workers))))
    else:
        hists = [_replica_counts(j) for j in jobs]
    return summarize(params, hists, time.perf_counter() - start)


@dataclass
class Bands:
    """Pass/fail bands for :func:`compare_report`.

    ``chi2_p_min`` is off by default: pooled vertex counts within a replica
    are not independent, so the statistic is reported but not gated.
    """

    head_k_max: int = 5
    head_tol: float = 0.01
    fit_k_min: int = 10
    fit_k_max: int = 60
    slope_lo: float = -3.2
    slope_hi: float = -2.8
    chi2_p_min: float | None = None


@dataclass
class ComparisonReport:
    m: int
    rows: list[dict]
    max_dev_theory: float
    max_dev_exact: float | None
    chi2_theory: float
    chi2_dof: int
    chi2_pvalue: float
    tail_exponent: float | None
    checks: dict[str, bool] = field(default_factory=dict)
    bands: Bands = field(default_factory=Bands)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "m": self.m,
            "max_dev_theory": self.max_dev_theory,
            "max_dev_exact": self.max_dev_exact,
            "chi2": {"statistic": self.chi2_theory, "dof": self.chi2_dof, "pvalue": self.chi2_pvalue},
            "tail_exponent": self.tail_exponent,
            "bands": asdict(self.bands),
            "checks": self.checks,
            "verdict": "PASS" if self.passed else "FAIL",
            "rows": self.rows,
        }

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), indent=2) + "\n"

    def summary_csv(self) -> str:
        lines = ["k,empirical,stderr,exact,theory,z_exact,z_theory"]
        for row in self.rows:
            cells = [str(row["k"])] + [
                "" if row[c] is None else format_float(row[c])
                for c in ("empirical", "stderr", "exact", "theory", "z_exact", "z_theory")
            ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def _zscore(observed: float, expected: float, stderr: float) -> float | None:
    diff = observed - expected
    if stderr > 0:
        return diff / stderr
    return 0.0 if diff == 0 else None


def merged_chi_square(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Pearson statistic after merging consecutive bins until each expects ``min_expected``.

    The last entries of both arrays should already hold the tail (everything
    beyond the tabulated range); a short final bin is folded into its
    neighbour.  Returns ``(statistic, dof, pvalue)``.
    """
    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if obs_bins:
            obs_bins[-1] += o_acc
            exp_bins[-1] += e_acc
        else:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
    o = np.array(obs_bins)
    e = np.array(exp_bins)
    dof = len(o) - 1
    if dof < 1:
        return 0.0, 0, 1.0
    stat = float(np.sum((o - e) ** 2 / e))
    return stat, dof, float(stats.chi2.sf(stat, dof))


def compare_report(empirical: ReplicaReport, exact: DegreeDistribution | None, m: int,
                   bands: Bands | None = None) -> ComparisonReport:
    """Compare replica means against the closed form and, when given, the exact ``P(k, T)``."""
    bands = bands or Bands()
    if len(empirical.ks) == 0:
        raise ValueError("empirical report has empty support")
    emp = dict(zip(empirical.ks.tolist(), empirical.mean.tolist()))
    se = dict(zip(empirical.ks.tolist(), empirical.stderr.tolist()))
    k_hi = max(max(emp), bands.head_k_max, exact.support_max if exact is not None else m)
    rows = []
    for k in range(m, k_hi + 1):
        theory = closed_form(k, m, "float64")
        ex = None
        if exact is not None and k <= exact.support_max:
            ex = float(exact[k])
        mu, s = emp.get(k, 0.0), se.get(k, 0.0)
        rows.append({
            "k": k,
            "empirical": mu,
            "stderr": s,
            "exact": ex,
            "theory": theory,
            "z_exact": None if ex is None else _zscore(mu, ex, s),
            "z_theory": _zscore(mu, theory, s),
            "missing": [name for name, v in (("empirical", k in emp), ("exact", ex is not None)) if not v],
        })
    max_dev_theory = max(abs(r["empirical"] - r["theory"]) for r in rows)
    dev_exact = [abs(r["empirical"] - r["exact"]) for r in rows if r["exact"] is not None]
    max_dev_exact = max(dev_exact) if dev_exact else None

    # pooled counts against theory; the final bin holds every vertex beyond k_hi
    total = float(empirical.replicas * empirical.params.n)
    kk = np.arange(m, k_hi + 1)
    obs = np.array([float(empirical.counts[empirical.ks == k].sum()) for k in kk] + [0.0])
    obs[-1] = total - obs[:-1].sum()
    p = np.array([closed_form(int(k), m, "float64") for k in kk])
    expected = total * np.append(p, max(0.0, 1.0 - p.sum()))
    chi2, dof, pval = merged_chi_square(obs, expected)

    try:
        slope = tail_exponent_fit(empirical.distribution(), bands.fit_k_min, bands.fit_k_max)
    except ValueError:
        slope = None

    head = [r for r in rows if r["k"] <= bands.head_k_max]
    checks = {
        "head_within_tol": all(abs(r["empirical"] - r["theory"]) <= bands.head_tol for r in head),
        "tail_exponent_in_band": slope is not None and bands.slope_lo <= slope <= bands.slope_hi,
    }
    if bands.chi2_p_min is not None:
        checks["chi2_not_rejected"] = pval >= bands.chi2_p_min
    return ComparisonReport(m, rows, max_dev_theory, max_dev_exact, chi2, dof, pval, slope, checks, bands)
