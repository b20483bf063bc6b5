"""Exact law of the degree chain ``k_I(T)`` of a single vertex.

Time is measured in coarse steps: vertex ``I`` is inserted at time ``I`` and
coarse step ``T -> T + 1`` consists of the ``m`` fine steps at fine times
``t = T*m + r`` (``r = 1..m``), each drawing a target with denominator
``2t - 1 = 2*T*m + 2*(r - 1) + 1``.  A vertex of degree ``kappa`` is hit at
such a fine step with probability ``kappa / (2t - 1)``.

Every function takes ``mode``: ``"rational"`` returns ``Fraction`` values and is
the correctness reference; ``"float64"`` returns floats and scales to long
horizons (survival products are accumulated as sums of ``log1p`` terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from lcdlab.distributions import DegreeDistribution
from lcdlab.process import NumericMode

FLOAT_SLACK = 1e-12


def _mode(mode) -> NumericMode:
    return NumericMode(mode)


def _ratio(a: int, b: int, mode: NumericMode):
    return Fraction(a, b) if mode is NumericMode.RATIONAL else a / b


def _one(mode: NumericMode):
    return Fraction(1) if mode is NumericMode.RATIONAL else 1.0


def _zero(mode: NumericMode):
    return Fraction(0) if mode is NumericMode.RATIONAL else 0.0


def fine_denominator(T: int, r: int, m: int) -> int:
    """``2t - 1`` for the ``r``-th fine step of coarse step ``T -> T + 1``."""
    return 2 * T * m + 2 * (r - 1) + 1


@dataclass(frozen=True)
class TransitionRow:
    k: int
    T: int
    m: int
    probs: tuple

    def __getitem__(self, j: int):
        return self.probs[j]


@dataclass
class VertexDegreeLaw:
    I: int
    T: int
    m: int
    probs: dict[int, Fraction | float]

    def __getitem__(self, k: int):
        return self.probs.get(k, 0)

    @property
    def support(self) -> tuple[int, int]:
        return self.m, (self.T - self.I + 2) * self.m

    def total(self):
        return sum(self.probs.values())


@dataclass
class FirstPassageTable:
    """``values[(k, S)] = f(k, I, S)`` over the admissible lattice of one vertex."""

    m: int
    I: int
    T_max: int
    values: dict[tuple[int, int], Fraction | float] = field(default_factory=dict)

    def __call__(self, k: int, S: int):
        return self.values.get((k, S), 0)

    def passage_mass(self, k: int, S_max: int | None = None):
        """``sum_S f(k, I, S)`` up to ``S_max``: probability that degree ``k`` is ever hit."""
        S_max = self.T_max if S_max is None else S_max
        return sum(self.values.get((k, S), 0) for S in range(self.I, S_max + 1))


# -- one-step kernel ---------------------------------------------------------


def _check_row_args(k: int, T: int, m: int) -> None:
    if m < 1 or T < 1:
        raise ValueError(f"need m >= 1 and T >= 1, got m={m}, T={T}")
    if not m <= k <= 2 * T * m:
        raise ValueError(f"degree k={k} outside [m, 2Tm] = [{m}, {2 * T * m}]")


def substep_increment_law(k: int, T: int, m: int, mode) -> list:
    """Distribution of the increment over coarse step ``T -> T + 1``, built one fine step at a time."""
    mode = _mode(mode)
    dist = [_one(mode)] + [_zero(mode)] * m
    for r in range(1, m + 1):
        denom = fine_denominator(T, r, m)
        new = [_zero(mode)] * (m + 1)
        for j in range(r):
            p = dist[j]
            if not p:
                continue
            hit = _ratio(k + j, denom, mode)
            new[j + 1] += p * hit
            new[j] += p * (1 - hit)
        dist = new
    return dist


def displayed_products(k: int, T: int, m: int, mode) -> dict[int, Fraction | float]:
    """The closed products for increments 0, 1 and m, evaluated term by term."""
    mode = _mode(mode)

    def miss(kappa, r):
        return 1 - _ratio(kappa, fine_denominator(T, r, m), mode)

    p0 = _one(mode)
    for r in range(1, m + 1):
        p0 *= miss(k, r)

    p1 = _zero(mode)
    for b in range(1, m + 1):
        term = _ratio(k, fine_denominator(T, b, m), mode)
        for q in range(1, b):
            term *= miss(k, q)
        for r in range(b + 1, m + 1):
            term *= miss(k + 1, r)
        p1 += term

    pm = _one(mode)
    for r in range(1, m + 1):
        pm *= _ratio(k + r - 1, fine_denominator(T, r, m), mode)
    return {0: p0, 1: p1, m: pm}


@lru_cache(maxsize=1 << 16)
def _row(k: int, T: int, m: int, mode: NumericMode) -> tuple:
    probs = substep_increment_law(k, T, m, mode)
    closed = displayed_products(k, T, m, mode)
    for j, v in closed.items():
        if mode is NumericMode.RATIONAL:
            if probs[j] != v:
                raise ArithmeticError(f"kernel mismatch at (k={k}, T={T}, m={m}, j={j})")
        elif not math.isclose(probs[j], v, rel_tol=1e-12, abs_tol=1e-300):
            raise ArithmeticError(f"kernel mismatch at (k={k}, T={T}, m={m}, j={j})")
    return tuple(probs)


def transition_row(k: int, T: int, m: int, mode="rational") -> TransitionRow:
    """Probabilities that a degree-``k`` vertex gains ``j = 0..m`` over step ``T -> T + 1``.

    Computed by the fine-step recursion; the closed products for ``j`` in
    ``{0, 1, m}`` are evaluated separately and must agree.
    """
    _check_row_args(k, T, m)
    return TransitionRow(k, T, m, _row(k, T, m, _mode(mode)))


# -- insertion ---------------------------------------------------------------


def insertion_substeps(I: int, m: int, mode="rational") -> list[dict[int, Fraction | float]]:
    """Law of the new vertex's running degree after each of its ``m`` fine steps.

    Entry ``r`` is the law after ``r`` fine steps (entry 0 is the point mass at
    0).  At fine time ``t`` a group with running degree ``d`` closes a loop
    with probability ``(d + 1) / (2t - 1)`` (degree ``+2``), otherwise its edge
    leaves the group (degree ``+1``).
    """
    if I < 1 or m < 1:
        raise ValueError(f"need I >= 1 and m >= 1, got I={I}, m={m}")
    mode = _mode(mode)
    laws = [{0: _one(mode)}]
    for r in range(1, m + 1):
        denom = 2 * ((I - 1) * m + r) - 1
        new: dict[int, Fraction | float] = {}
        for d, p in laws[-1].items():
            loop = _ratio(d + 1, denom, mode)
            if loop:
                new[d + 2] = new.get(d + 2, 0) + p * loop
            if loop != 1:
                new[d + 1] = new.get(d + 1, 0) + p * (1 - loop)
        laws.append(dict(sorted(new.items())))
    return laws


def insertion_distribution(I: int, m: int, mode="rational") -> VertexDegreeLaw:
    """Law of ``k_I(I)``, the degree of vertex ``I`` right after insertion."""
    mode = _mode(mode)
    if I == 1:
        return VertexDegreeLaw(1, 1, m, {2 * m: _one(mode)})
    return VertexDegreeLaw(I, I, m, insertion_substeps(I, m, mode)[-1])


def no_loop_mass(I: int, m: int, mode="rational"):
    """Closed product for ``f(m, I, I)``: no loop among the ``m`` insertion edges."""
    mode = _mode(mode)
    out = _one(mode)
    for r in range(1, m + 1):
        out *= 1 - _ratio(r, 2 * (I - 1) * m + 2 * (r - 1) + 1, mode)
    return out


def all_loop_mass(I: int, m: int, mode="rational"):
    """Closed product for ``f(2m, I, I)``: every insertion edge is a loop."""
    mode = _mode(mode)
    out = _one(mode)
    for r in range(1, m + 1):
        out *= _ratio(2 * (r - 1) + 1, 2 * (I - 1) * m + 2 * (r - 1) + 1, mode)
    return out


def last_loop_sum(k: int, I: int, m: int, mode="rational"):
    """``f(k, I, I)`` for ``m < k < 2m`` as a sum over the fine step of the last loop.

    For last loop at fine step ``r`` the degree must be ``k - (m - r) - 2``
    after ``r - 1`` fine steps, a loop closes at step ``r``, and none of the
    remaining ``m - r`` steps loops.  The running-degree laws come from
    :func:`insertion_substeps`.
    """
    if not m < k < 2 * m:
        raise ValueError(f"need m < k < 2m, got k={k}, m={m}")
    mode = _mode(mode)
    hat = insertion_substeps(I, m, mode)
    base = 2 * (I - 1) * m
    total = _zero(mode)
    for r in range(k - m, m + 1):
        peak = k - (m - r)
        term = hat[r - 1].get(peak - 2, 0) * _ratio(peak - 1, base + 2 * (r - 1) + 1, mode)
        for q in range(r + 1, m + 1):
            term *= 1 - _ratio(peak + (q - r), base + 2 * (q - 1) + 1, mode)
        total += term
    return total


# -- forward route -----------------------------------------------------------


def _apply_kernel(law: Mapping[int, object], T: int, m: int, mode: NumericMode) -> dict:
    out: dict = {}
    for k, p in law.items():
        if not p:
            continue
        row = _row(k, T, m, mode)
        for j, q in enumerate(row):
            if q:
                out[k + j] = out.get(k + j, 0) + p * q
    return dict(sorted(out.items()))


def forward_laws(I: int, T: int, m: int, mode="rational") -> list[VertexDegreeLaw]:
    """Laws of ``k_I(S)`` for ``S = I..T`` by repeated kernel application."""
    if not 1 <= I <= T:
        raise ValueError(f"need 1 <= I <= T, got I={I}, T={T}")
    mode = _mode(mode)
    law = insertion_distribution(I, m, mode)
    laws = [law]
    for S in range(I, T):
        law = VertexDegreeLaw(I, S + 1, m, _apply_kernel(law.probs, S, m, mode))
        laws.append(law)
    return laws


def degree_prob_forward(I: int, T: int, m: int, mode="rational") -> VertexDegreeLaw:
    """Full law of ``k_I(T)`` from the insertion law and ``T - I`` kernel steps."""
    return forward_laws(I, T, m, mode)[-1]


# -- first-passage route -----------------------------------------------------


def _log_step(k: int, A: int, m: int) -> float:
    """``log`` of the probability that degree ``k`` is not hit during step ``A - 1 -> A``."""
    s = 0.0
    for q in range(1, m + 1):
        x = k / fine_denominator(A - 1, q, m)
        if x >= 1:
            return -math.inf
        s += math.log1p(-x)
    return s


def survival_product(k: int, S: int, T: int, m: int, mode="rational"):
    """Probability that a vertex of degree ``k`` at time ``S`` is untouched up to ``T``."""
    if S > T:
        raise ValueError(f"need S <= T, got S={S}, T={T}")
    mode = _mode(mode)
    if S < 1:
        raise ValueError(f"need S >= 1, got {S}")
    if S < T and k >= fine_denominator(S, 1, m):
        raise ValueError(f"degree {k} cannot survive step {S} -> {S + 1} (factor <= 0)")
    if mode is NumericMode.RATIONAL:
        out = Fraction(1)
        for A in range(S + 1, T + 1):
            for q in range(1, m + 1):
                out *= 1 - Fraction(k, fine_denominator(A - 1, q, m))
        return out
    return math.exp(sum(_log_step(k, A, m) for A in range(S + 1, T + 1)))


def max_degree(I: int, S: int, m: int) -> int:
    return (S - I + 2) * m


class FirstPassageSolver:
    """``f(k, I, S)`` and ``P(k, I, T)`` for one vertex via passage times.

    ``P(k, I, T)`` is the sum over first-passage times ``S`` of
    ``f(k, I, S)`` times the survival product from ``S`` to ``T``.  For
    ``S > I`` the first passage into ``k`` comes from ``k - j`` at ``S - 1``
    followed by a jump of ``j``; the ``P(k - j, I, S - 1)`` values are
    supplied by ``provider(I, S)`` when given, and otherwise come from this
    solver itself at lower degrees, so no forward iteration is involved.
    """

    def __init__(self, I: int, m: int, mode="rational",
                 provider: Callable[[int, int], Mapping[int, object]] | None = None):
        if I < 1 or m < 1:
            raise ValueError(f"need I >= 1 and m >= 1, got I={I}, m={m}")
        self.I, self.m, self.mode = I, m, _mode(mode)
        self.provider = provider
        self.insertion = insertion_distribution(I, m, self.mode)
        self._f: dict[tuple[int, int], object] = {}
        self._p: dict[tuple[int, int], object] = {}
        self._log_cum: dict[int, list[float]] = {}

    def _check(self, k: int, S: int) -> None:
        if S < self.I:
            raise ValueError(f"time S={S} precedes insertion of vertex {self.I}")
        if not self.m <= k <= max_degree(self.I, S, self.m):
            raise ValueError(f"degree {k} unreachable for vertex {self.I} at time {S}")

    def _prev(self, k: int, S: int):
        if self.provider is not None:
            return self.provider(self.I, S).get(k, 0)
        if not self.m <= k <= max_degree(self.I, S, self.m):
            return _zero(self.mode)
        return self.prob(k, S)

    def f(self, k: int, S: int):
        self._check(k, S)
        key = (k, S)
        if key in self._f:
            return self._f[key]
        if S == self.I:
            val = self.insertion[k]
            val = val if val else _zero(self.mode)
        elif k == self.m:
            val = _zero(self.mode)
        else:
            val = _zero(self.mode)
            for j in range(1, self.m + 1):
                src = k - j
                if src < self.m:
                    break
                p = self._prev(src, S - 1)
                if p:
                    val += p * _row(src, S - 1, self.m, self.mode)[j]
        self._f[key] = val
        return val

    def _survival(self, k: int, S: int, T: int):
        if self.mode is NumericMode.RATIONAL:
            return survival_product(k, S, T, self.m, self.mode)
        # prefix sums of log-survival per step, so each (S, T) pair is O(1)
        cum = self._log_cum.setdefault(k, [0.0])
        while len(cum) <= T - self.I:
            A = self.I + len(cum)
            step = _log_step(k, A, self.m)
            # steps where k cannot survive precede every valid query window
            cum.append(cum[-1] + (step if step > -math.inf else 0.0))
        return math.exp(cum[T - self.I] - cum[S - self.I])

    def prob(self, k: int, T: int):
        self._check(k, T)
        key = (k, T)
        if key in self._p:
            return self._p[key]
        total = _zero(self.mode)
        for S in range(self.I, T + 1):
            if k > max_degree(self.I, S, self.m):
                continue
            fk = self.f(k, S)
            if fk:
                total += fk * self._survival(k, S, T)
        self._p[key] = total
        return total

    def table(self, T_max: int) -> FirstPassageTable:
        tab = FirstPassageTable(self.m, self.I, T_max)
        for S in range(self.I, T_max + 1):
            for k in range(self.m, max_degree(self.I, S, self.m) + 1):
                tab.values[(k, S)] = self.f(k, S)
        return tab


def first_passage(k: int, I: int, S: int, m: int, mode="rational",
                  provider: Callable[[int, int], Mapping[int, object]] | None = None):
    """Probability that vertex ``I`` first has degree ``k`` at time ``S``."""
    return FirstPassageSolver(I, m, mode, provider).f(k, S)


def first_passage_table(I: int, T_max: int, m: int, mode="rational") -> FirstPassageTable:
    return FirstPassageSolver(I, m, mode).table(T_max)


def degree_prob_fp(k: int, I: int, T: int, m: int, mode="rational"):
    """``P(k, I, T)`` by the first-passage decomposition."""
    return FirstPassageSolver(I, m, mode).prob(k, T)


def degree_law_fp(I: int, T: int, m: int, mode="rational") -> VertexDegreeLaw:
    """All of ``P(., I, T)`` by the first-passage decomposition (one shared solver)."""
    solver = FirstPassageSolver(I, m, mode)
    lo, hi = m, max_degree(I, T, m)
    return VertexDegreeLaw(I, T, m, {k: solver.prob(k, T) for k in range(lo, hi + 1)})


# -- network degree ----------------------------------------------------------


def _network_rational(T: int, m: int, k_max: int) -> tuple[dict, Fraction]:
    mode = NumericMode.RATIONAL
    total: dict[int, Fraction] = {}
    for S in range(1, T + 1):
        if S > 1:
            total = _apply_kernel(total, S - 1, m, mode)
        for k, p in insertion_distribution(S, m, mode).probs.items():
            total[k] = total.get(k, 0) + p
    entries = {k: total.get(k, Fraction(0)) / T for k in range(m, k_max + 1)}
    overflow = sum((v for k, v in total.items() if k > k_max), Fraction(0)) / T
    return entries, overflow


def _insertion_vector(I: int, m: int, size: int) -> np.ndarray:
    vec = np.zeros(size)
    for k, p in insertion_distribution(I, m, NumericMode.FLOAT64).probs.items():
        vec[min(k, size - 1)] += p
    return vec


def _network_float(T: int, m: int, k_max: int) -> tuple[dict, float]:
    # index k_max + 1 collects everything above k_max; the chain never comes back down
    size = k_max + 2
    ks = np.arange(size, dtype=float)
    total = _insertion_vector(1, m, size)
    for S in range(1, T):
        for r in range(1, m + 1):
            hit = ks / fine_denominator(S, r, m)
            hit[-1] = 0.0
            moved = total * hit
            total -= moved
            total[1:] += moved[:-1]
        total += _insertion_vector(S + 1, m, size)
    entries = {k: float(total[k] / T) for k in range(m, k_max + 1)}
    return entries, float(total[-1] / T)


def network_degree(T: int, m: int, k_max: int | None = None, mode="float64") -> DegreeDistribution:
    """``P(k, T)``, the average over ``I = 1..T`` of ``P(k, I, T)``, for ``k in [m, k_max]``.

    The per-vertex laws are never materialised: their sum evolves under the
    same kernel as each law, plus the new vertex's insertion law at every
    step.  Mass beyond ``k_max`` is reported as ``truncated_mass``.
    """
    if T < 1 or m < 1:
        raise ValueError(f"need T >= 1 and m >= 1, got T={T}, m={m}")
    k_max = m + 60 if k_max is None else k_max
    if k_max < m:
        raise ValueError(f"k_max={k_max} is below m={m}")
    mode = _mode(mode)
    if mode is NumericMode.RATIONAL:
        entries, overflow = _network_rational(T, m, k_max)
    else:
        entries, overflow = _network_float(T, m, k_max)
    return DegreeDistribution(
        entries, "probability", m, k_max, overflow, {"T": T, "m": m, "mode": mode.value}
    )


def network_degree_fp(T: int, m: int, k_max: int | None = None, mode="rational") -> DegreeDistribution:
    """``P(k, T)`` assembled from the first-passage route, vertex by vertex."""
    k_max = m + 60 if k_max is None else k_max
    mode = _mode(mode)
    acc = {k: _zero(mode) for k in range(m, k_max + 1)}
    overflow = _zero(mode)
    for I in range(1, T + 1):
        law = degree_law_fp(I, T, m, mode)
        for k, p in law.probs.items():
            if k <= k_max:
                acc[k] += p
            else:
                overflow += p
    entries = {k: v / T for k, v in acc.items()}
    return DegreeDistribution(
        entries, "probability", m, k_max, overflow / T, {"T": T, "m": m, "mode": mode.value}
    )
