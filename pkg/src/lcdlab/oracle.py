"""Brute-force ground truth at tiny sizes, in exact rational arithmetic.

Both enumerations return the joint law of the final coarse degree sequence.
The process enumeration follows the attachment rule one fine edge at a time;
the pairing enumeration walks every perfect matching of ``2*m*n`` points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from lcdlab.errors import GuardError
from lcdlab.process import Pairing, pairing_to_graph

MAX_FINE_EDGES = 12  # process enumeration: m*T
MAX_POINTS = 12  # pairing enumeration: 2*m*n, at most 11!! = 10395 matchings


@dataclass
class TrajectoryLaw:
    """Exact law of the degree sequence ``(d_1, ..., d_T)`` of ``G_m^T``."""

    m: int
    T: int
    probs: dict[tuple[int, ...], Fraction]

    def marginal(self, I: int) -> dict[int, Fraction]:
        """Law of the degree of vertex ``I`` (1-based)."""
        out: dict[int, Fraction] = {}
        for degrees, p in self.probs.items():
            out[degrees[I - 1]] = out.get(degrees[I - 1], Fraction(0)) + p
        return dict(sorted(out.items()))

    def marginals(self) -> dict[int, dict[int, Fraction]]:
        return {I: self.marginal(I) for I in range(1, self.T + 1)}

    def network_degree(self) -> dict[int, Fraction]:
        """Expected fraction of vertices of each degree."""
        out: dict[int, Fraction] = {}
        for degrees, p in self.probs.items():
            for d in degrees:
                out[d] = out.get(d, Fraction(0)) + p / self.T
        return dict(sorted(out.items()))

    def to_json(self) -> str:
        rows = [
            {"degrees": list(d), "numerator": p.numerator, "denominator": p.denominator}
            for d, p in sorted(self.probs.items())
        ]
        return json.dumps({"schema_version": 1, "m": self.m, "T": self.T, "law": rows}, indent=2) + "\n"


def _check(m: int, T: int) -> None:
    if m < 1 or T < 1:
        raise ValueError(f"need m >= 1 and T >= 1, got m={m}, T={T}")


def _double_factorial_odd(n_pairs: int) -> int:
    out = 1
    for i in range(1, 2 * n_pairs, 2):
        out *= i
    return out


def enumerate_process(m: int, T: int) -> TrajectoryLaw:
    """Exact law of the degree sequence of ``G_m^T`` by exhaustive branching.

    At fine step ``t`` every one of the ``2t - 1`` slots is a branch of
    weight 1: an existing vertex of degree ``d`` accounts for ``d`` of them
    and the new vertex for the last one.  Branches reaching the same state are
    merged with their slot counts added, so final counts are numerators over
    ``(2N - 1)!!``.  The state keeps fine degrees for the vertex under
    construction and only the block totals for finished vertices; once a
    block is closed, which of its fine vertices is hit never matters again.
    """
    _check(m, T)
    if m * T > MAX_FINE_EDGES:
        raise GuardError(
            f"m*T = {m * T} exceeds the enumeration limit {MAX_FINE_EDGES} "
            f"(about (2mT-1)!! branches)"
        )
    # state: (closed block degrees, fine degrees of the open block)
    states: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {((), ()): 1}
    for t in range(1, m * T + 1):
        nxt: dict = {}
        for (closed, open_), count in states.items():
            fine = open_ + (1,)  # new fine vertex with its out-endpoint
            # target: a closed block
            for i, d in enumerate(closed):
                key = (closed[:i] + (d + 1,) + closed[i + 1:], fine)
                nxt[key] = nxt.get(key, 0) + count * d
            # target: a fine vertex of the open block (the new vertex owns one extra slot)
            for i, d in enumerate(open_):
                key = (closed, fine[:i] + (d + 1,) + fine[i + 1:])
                nxt[key] = nxt.get(key, 0) + count * d
            key = (closed, fine[:-1] + (2,))
            nxt[key] = nxt.get(key, 0) + count
        if t % m == 0:
            merged: dict = {}
            for (closed, open_), w in nxt.items():
                key = (closed + (sum(open_),), ())
                merged[key] = merged.get(key, 0) + w
            nxt = merged
        states = nxt
    total = _double_factorial_odd(m * T)
    probs: dict[tuple[int, ...], Fraction] = {}
    for (closed, _), w in states.items():
        probs[closed] = probs.get(closed, Fraction(0)) + Fraction(w, total)
    assert sum(probs.values()) == 1
    return TrajectoryLaw(m, T, dict(sorted(probs.items())))


def all_pairings(n_points: int) -> Iterator[np.ndarray]:
    """Every perfect matching of ``n_points`` points as a 0-based partner array."""
    partner = np.full(n_points, -1, dtype=np.int64)

    def rec(lowest: int):
        while lowest < n_points and partner[lowest] != -1:
            lowest += 1
        if lowest == n_points:
            yield partner.copy()
            return
        for q in range(lowest + 1, n_points):
            if partner[q] == -1:
                partner[lowest], partner[q] = q, lowest
                yield from rec(lowest + 1)
                partner[lowest] = partner[q] = -1

    yield from rec(0)


def enumerate_pairings(n: int, m: int) -> TrajectoryLaw:
    """Push the uniform law on chord diagrams of ``2*m*n`` points through the LCD map."""
    _check(m, n)
    if 2 * m * n > MAX_POINTS:
        raise GuardError(f"2*m*n = {2 * m * n} points exceeds the pairing enumeration limit {MAX_POINTS}")
    counts: dict[tuple[int, ...], int] = {}
    for partner in all_pairings(2 * m * n):
        g = pairing_to_graph(Pairing(partner), m)
        key = tuple(int(d) for d in g.degrees)
        counts[key] = counts.get(key, 0) + 1
    total = sum(counts.values())
    assert total == _double_factorial_odd(m * n)
    return TrajectoryLaw(m, n, {k: Fraction(c, total) for k, c in sorted(counts.items())})
