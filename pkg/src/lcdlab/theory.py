"""Closed-form stationary degree distribution of the LCD model.

``P(k) = 2m(m+1) / (k(k+1)(k+2))`` for ``k >= m``; it is also reached by
iterating ``P(k) = (k-1)/(k+2) * P(k-1)`` from ``P(m) = 2/(m+2)``.  The same
formula describes the BA mean-field and attraction-model results with initial
attractiveness ``m``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from lcdlab.distributions import DegreeDistribution
from lcdlab.process import NumericMode


def _cast(x: Fraction, mode) -> Fraction | float:
    return x if NumericMode(mode) is NumericMode.RATIONAL else float(x)


def closed_form(k: int, m: int, mode="rational") -> Fraction | float:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if k < m:
        raise ValueError(f"k={k} is below the minimum degree m={m}")
    return _cast(Fraction(2 * m * (m + 1), k * (k + 1) * (k + 2)), mode)


def recursion_table(m: int, k_max: int, mode="rational") -> DegreeDistribution:
    """``P(m..k_max)`` by the ratio recursion seeded at ``P(m) = 2/(m+2)``."""
    if k_max < m:
        raise ValueError(f"k_max={k_max} is below m={m}")
    p = Fraction(2, m + 2)
    entries = {m: p}
    for k in range(m + 1, k_max + 1):
        p = p * Fraction(k - 1, k + 2)
        entries[k] = p
    return DegreeDistribution(
        {k: _cast(v, mode) for k, v in entries.items()},
        "probability",
        m,
        k_max,
        _cast(tail_mass(k_max, m), mode),
        {"m": m, "mode": NumericMode(mode).value},
    )


def tail_mass(k_max: int, m: int) -> Fraction:
    """``sum_{k > k_max} P(k)``, which telescopes to ``m(m+1) / ((k_max+1)(k_max+2))``."""
    if k_max < m - 1:
        raise ValueError(f"k_max={k_max} is below m-1={m - 1}")
    return Fraction(m * (m + 1), (k_max + 1) * (k_max + 2))


def indegree_form(d: int, m: int, mode="rational") -> Fraction | float:
    """Limiting fraction of vertices with indegree ``d`` (total degree ``d + m``)."""
    if d < 0:
        raise ValueError(f"indegree must be >= 0, got {d}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    alpha = Fraction(2 * m * (m + 1), (d + m) * (d + m + 1) * (d + m + 2))
    return _cast(alpha, mode)


def theory_distribution(m: int, k_max: int, mode="float64") -> DegreeDistribution:
    entries = {k: closed_form(k, m, mode) for k in range(m, k_max + 1)}
    return DegreeDistribution(
        entries, "probability", m, k_max, _cast(tail_mass(k_max, m), mode),
        {"m": m, "mode": NumericMode(mode).value},
    )


def tail_exponent_fit(dist: DegreeDistribution, k_min_fit: int, k_max_fit: int | None = None) -> float:
    """Least-squares slope of ``log(value)`` against ``log(k)`` over the fit window.

    Only entries with positive mass are used.  The usual window starts at
    ``10*m``; below that the ``(k+1)(k+2)`` factors bend the curve away from
    slope -3.
    """
    ks, vs = dist.arrays()
    keep = (ks >= k_min_fit) & (vs > 0)
    if k_max_fit is not None:
        keep &= ks <= k_max_fit
    if keep.sum() < 5:
        raise ValueError(f"need at least 5 positive entries in the fit window, got {int(keep.sum())}")
    slope, _ = np.polyfit(np.log(ks[keep]), np.log(vs[keep]), 1)
    return float(slope)
