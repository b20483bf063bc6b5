import json
import math

import numpy as np
import pytest

from lcdlab.distributions import DegreeDistribution
from lcdlab.errors import GuardError
from lcdlab.exact import network_degree
from lcdlab.harness import (
    Bands,
    compare_report,
    merged_chi_square,
    replica_rng,
    run_replicas,
    summarize,
)
from lcdlab.process import ProcessParams
from lcdlab.theory import closed_form


def test_single_vertex_report():
    r = run_replicas(ProcessParams(1, 1, seed=5), 10)
    assert r.ks.tolist() == [2]
    assert r.mean.tolist() == [1.0]
    assert r.std.tolist() == [0.0]
    assert r.counts.tolist() == [10]


def test_two_vertex_mean_of_degree_two():
    r = run_replicas(ProcessParams(1, 2, seed=2024), 100_000)
    idx = r.ks.tolist().index(2)
    assert abs(r.mean[idx] - 1 / 3) <= 3 * r.stderr[idx]


def test_means_sum_to_one():
    r = run_replicas(ProcessParams(3, 500, seed=1), 7)
    assert abs(r.mean.sum() - 1) <= 1e-12
    assert np.all(r.mean >= 0)


def test_requires_two_replicas():
    with pytest.raises(ValueError):
        run_replicas(ProcessParams(1, 10), 1)


def test_guard(monkeypatch):
    import lcdlab.harness as h

    monkeypatch.setattr(h, "MAX_TOTAL_EDGES", 1000)
    with pytest.raises(GuardError):
        run_replicas(ProcessParams(2, 100), 6)


def test_replica_streams_differ():
    a = replica_rng(9, 0).integers(0, 2**63, size=4)
    b = replica_rng(9, 1).integers(0, 2**63, size=4)
    c = replica_rng(9, 0).integers(0, 2**63, size=4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, c)


def test_deterministic_and_worker_independent():
    p = ProcessParams(2, 2000, seed=77)
    a = run_replicas(p, 12)
    b = run_replicas(p, 12)
    c = run_replicas(p, 12, workers=3)
    assert a.to_json() == b.to_json() == c.to_json()
    assert "duration_s" not in json.loads(a.to_json())
    assert "duration_s" in json.loads(a.to_json(timing=True))


def test_summarize_is_order_free_in_pooled_counts():
    p = ProcessParams(1, 4)
    hists = [np.array([0, 2, 0, 1, 1]), np.array([0, 1, 2, 1]), np.array([0, 2, 1, 0, 0, 1])]
    a = summarize(p, hists)
    b = summarize(p, hists[::-1])
    assert np.array_equal(a.counts, b.counts)
    assert np.allclose(a.mean, b.mean, rtol=0, atol=1e-15)


# -- comparison --------------------------------------------------------------


def _fake_report(m, values, R=10, n=1000):
    """A ReplicaReport whose mean is exactly ``values`` with unit stderr."""
    ks = np.array(sorted(values))
    hist = [np.zeros(ks.max() + 1)]
    rep = summarize(ProcessParams(m, n), hist * 2)
    rep.ks = ks
    rep.mean = np.array([values[k] for k in ks])
    rep.std = np.full(len(ks), 0.01)
    rep.stderr = rep.std / math.sqrt(R)
    rep.replicas = R
    rep.counts = rep.mean * n * R
    return rep


def test_empirical_equal_to_theory():
    m, kmax = 2, 400
    values = {k: closed_form(k, m, "float64") for k in range(m, kmax + 1)}
    rep = _fake_report(m, values, n=10**6)
    cmp = compare_report(rep, None, m)
    for row in cmp.rows:
        assert row["z_theory"] == 0
    assert cmp.max_dev_theory == 0
    # the only residual is the unobserved tail beyond kmax
    assert cmp.chi2_theory == pytest.approx(0.0, abs=1e-6)


def test_missing_flags():
    rep = _fake_report(1, {1: 0.7, 3: 0.3})
    exact = DegreeDistribution({1: 0.6, 2: 0.2}, support_max=2)
    cmp = compare_report(rep, exact, 1)
    by_k = {r["k"]: r for r in cmp.rows}
    assert by_k[2]["missing"] == ["empirical"]
    assert by_k[3]["missing"] == ["exact"]
    assert by_k[1]["missing"] == []
    assert by_k[1]["z_exact"] == pytest.approx(0.1 / (0.01 / math.sqrt(10)))


def test_empty_support_rejected():
    rep = _fake_report(1, {1: 1.0})
    rep.ks = np.array([], dtype=np.int64)
    with pytest.raises(ValueError):
        compare_report(rep, None, 1)


def test_merged_chi_square_bins():
    obs = np.array([50.0, 30.0, 10.0, 2.0, 1.0, 1.0, 6.0])
    exp = np.array([50.0, 30.0, 10.0, 2.0, 2.0, 2.0, 4.0])
    stat, dof, p = merged_chi_square(obs, exp)
    # bins: 50, 30, 10, (2+2+2) + short tail 4 folded in
    assert dof == 3
    assert stat == pytest.approx(0.0)
    assert p == pytest.approx(1.0)


def test_compare_bands_pass_and_fail():
    rep = run_replicas(ProcessParams(1, 20_000, seed=3), 10)
    ok = compare_report(rep, None, 1)
    assert ok.checks["head_within_tol"]
    tight = compare_report(rep, None, 1, Bands(head_tol=1e-9))
    assert not tight.passed
    gated = compare_report(rep, None, 1, Bands(chi2_p_min=2.0))
    assert "chi2_not_rejected" in gated.checks and not gated.passed


def test_report_formats():
    rep = run_replicas(ProcessParams(1, 300, seed=4), 5)
    exact = network_degree(300, 1)
    cmp = compare_report(rep, exact, 1)
    csv = cmp.summary_csv().splitlines()
    assert csv[0] == "k,empirical,stderr,exact,theory,z_exact,z_theory"
    assert len(csv) == len(cmp.rows) + 1
    data = json.loads(cmp.to_json())
    assert data["schema_version"] == 1
    assert data["verdict"] in ("PASS", "FAIL")
    assert set(data["checks"]) == {"head_within_tol", "tail_exponent_in_band"}


def test_consistency_in_R():
    m, n = 1, 1000
    exact = network_degree(n, m)
    medians = []
    for R in (10, 100, 1000):
        devs = []
        for rep_i in range(5):
            rep = run_replicas(ProcessParams(m, n, seed=1000 * R + rep_i), R)
            devs.append(compare_report(rep, exact, m).max_dev_exact)
        medians.append(float(np.median(devs)))
    assert medians[0] >= medians[1] >= medians[2]


def test_finite_size_direction():
    m, n = 1, 1000
    exact = network_degree(n, m)
    rep = run_replicas(ProcessParams(m, n, seed=31), 40_000)
    emp = rep.mean[rep.ks.tolist().index(m)]
    assert abs(emp - exact[m]) < abs(emp - closed_form(m, m, "float64"))
