import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from lcdlab.cli import main
from lcdlab.distributions import read_distribution_csv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_T2(capsys):
    code, out, _ = run(capsys, "exact", "--m", 1, "--T", 2, "--kmax", 3, "--mode", "rational")
    assert code == 0
    assert out.splitlines()[0] == "k,numerator,denominator"
    assert read_distribution_csv(out) == {1: F(1, 3), 2: F(1, 3), 3: F(1, 3)}


def test_exact_T2_float(capsys):
    code, out, _ = run(capsys, "exact", "--m", 1, "--T", 2, "--kmax", 3)
    assert out.splitlines()[0] == "k,value"
    vals = read_distribution_csv(out)
    assert all(v == pytest.approx(1 / 3, rel=1e-15) for v in vals.values())


def test_exact_T1(capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "exact", "--m", 1, "--T", 1, "--mode", "rational", "--report", rep)
    assert code == 0
    vals = {k: v for k, v in read_distribution_csv(out).items() if v}
    assert vals == {2: 1}
    data = json.loads(rep.read_text())
    assert set(data) >= {"schema_version", "m", "T", "mode", "kmax", "truncated_mass", "entries"}


def test_exact_check_routes(capsys, tmp_path):
    rep, routes = tmp_path / "r.json", tmp_path / "fp.csv"
    code, out, _ = run(capsys, "exact", "--check-routes", "--m", 2, "--T", 20, "--mode", "rational",
                       "--report", rep, "--routes-out", routes)
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["route_discrepancy"] == {"numerator": 0, "denominator": 1}
    assert routes.read_text() == out


def test_exact_guards(capsys):
    assert run(capsys, "exact", "--T", 201, "--mode", "rational")[0] == 3
    assert run(capsys, "exact", "--T", 61, "--check-routes")[0] == 3


def test_theory(capsys):
    code, out, _ = run(capsys, "theory", "--m", 1, "--kmax", 3, "--mode", "rational")
    assert code == 0
    assert read_distribution_csv(out) == {1: F(2, 3), 2: F(1, 6), 3: F(1, 15)}


def test_theory_kmax_below_m(capsys):
    assert run(capsys, "theory", "--m", 5, "--kmax", 3)[0] == 2


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--m", 1, "--T", 2)
    law = {tuple(r["degrees"]): F(r["numerator"], r["denominator"]) for r in json.loads(out)["law"]}
    assert law == {(2, 2): F(1, 3), (3, 1): F(2, 3)}
    code, out2, _ = run(capsys, "enumerate", "--m", 1, "--T", 2, "--pairings")
    assert out2 == out


def test_enumerate_guard(capsys):
    assert run(capsys, "enumerate", "--m", 3, "--T", 5)[0] == 3


@pytest.mark.parametrize("argv", [
    ["simulate", "--m", "0"],
    ["simulate", "--n", "-3"],
    ["simulate", "--replicas", "x"],
    ["simulate", "--seed", "-1"],
    ["exact", "--mode", "decimal"],
    ["nosuch"],
    [],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_usage_message_names_flag(capsys):
    code, _, err = run(capsys, "simulate", "--m", 0)
    assert code == 2
    assert "--m" in err


def test_simulate_files(capsys, tmp_path):
    args = ["simulate", "--m", 2, "--n", 3000, "--replicas", 4, "--seed", 42]
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        d.mkdir()
        code, _, _ = run(capsys, *args, "--out", d / "h.csv", "--report", d / "r.json", "--edges", d / "e.txt")
        assert code == 0
        outs.append([(d / f).read_bytes() for f in ("h.csv", "r.json", "e.txt")])
    assert outs[0] == outs[1]
    assert outs[0][0].decode().splitlines()[0] == "k,value"
    assert len(outs[0][2].decode().splitlines()) == 2 * 3000
    assert json.loads(outs[0][1])["schema_version"] == 1


def test_simulate_guard(capsys, monkeypatch):
    import lcdlab.harness as h

    monkeypatch.setattr(h, "MAX_TOTAL_EDGES", 10)
    assert run(capsys, "simulate", "--n", 100, "--replicas", 2)[0] == 3


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nm = 1\nT = 2\nkmax = 3\nmode = rational\n")
    _, from_cfg, _ = run(capsys, "exact", "--config", cfg)
    assert read_distribution_csv(from_cfg) == {1: F(1, 3), 2: F(1, 3), 3: F(1, 3)}
    _, overridden, _ = run(capsys, "exact", "--config", cfg, "--T", 1)
    assert {k: v for k, v in read_distribution_csv(overridden).items() if v} == {2: 1}
    # --config belongs to the subcommand
    assert run(capsys, "--config", cfg, "exact")[0] == 2


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(capsys, "exact", "--config", bad)[0] == 2
    bad.write_text("m = 0\n")
    assert run(capsys, "exact", "--config", bad)[0] == 2
    assert run(capsys, "exact", "--config", tmp_path / "missing.cfg")[0] == 2


def test_compare_pass_and_fail(capsys, tmp_path):
    base = ["compare", "--m", 1, "--n", 20000, "--replicas", 4, "--seed", 1]
    code, out, err = run(capsys, *base)
    assert code == 0
    assert err.startswith("PASS")
    assert out.splitlines()[0] == "k,empirical,stderr,exact,theory,z_exact,z_theory"
    code, _, err = run(capsys, *base, "--head-tol", "1e-9")
    assert code == 4
    assert err.startswith("FAIL")


def test_compare_outputs_deterministic(capsys, tmp_path):
    base = ["compare", "--m", 2, "--n", 5000, "--replicas", 6, "--seed", 8, "--workers", 2]
    blobs = []
    for i in range(2):
        d = tmp_path / str(i)
        d.mkdir()
        run(capsys, *base, "--out", d / "s.csv", "--report", d / "r.json", "--plot", d / "p.svg")
        blobs.append([(d / f).read_bytes() for f in ("s.csv", "r.json", "p.svg")])
    assert blobs[0] == blobs[1]
    svg = blobs[0][2].decode()
    assert svg.startswith("<svg") and "slope -3" in svg


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "lcdlab", "theory", "--m", "2", "--kmax", "4"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "k,value"
    assert float(res.stdout.splitlines()[1].split(",")[1]) == pytest.approx(0.5)
