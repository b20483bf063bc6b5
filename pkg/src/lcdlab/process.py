"""Dynamic and static constructions of LCD random graphs.

The dynamic route runs the fine process ``G_1`` one edge at a time and then
merges consecutive blocks of ``m`` fine vertices into one coarse vertex.  The
static route draws a uniform perfect matching of ``2*m*n`` points (a linearized
chord diagram) and reads the same kind of graph off it.

Vertices are 0-based internally.  Edges are stored as a flat endpoint array in
which positions ``2e`` and ``2e + 1`` hold the source (the newer vertex) and the
target of edge ``e``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from lcdlab.errors import GuardError

# endpoints are int64 (8 bytes each); guards against absurd allocations
MAX_FINE_EDGES = 500_000_000


class NumericMode(str, enum.Enum):
    FLOAT64 = "float64"
    RATIONAL = "rational"


@dataclass(frozen=True)
class ProcessParams:
    m: int
    n: int
    seed: int = 0
    numeric_mode: NumericMode = NumericMode.FLOAT64

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "numeric_mode", NumericMode(self.numeric_mode))


@dataclass
class GraphState:
    """Multigraph with loops, stored as an endpoint list plus total degrees.

    ``m`` records the block size used to build the graph (1 for the fine
    process).  A loop contributes its vertex twice to ``endpoints``.  Only the
    fine endpoint list is stored; coarse ids are ``fine // m``.
    """

    fine_endpoints: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    degrees: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    m: int = 1

    @property
    def endpoints(self) -> np.ndarray:
        """Endpoint list in coarse vertex ids."""
        return self.fine_endpoints // self.m if self.m > 1 else self.fine_endpoints

    @property
    def t(self) -> int:
        """Number of edges placed so far."""
        return len(self.fine_endpoints) // 2

    def fine_degrees(self) -> np.ndarray:
        return np.bincount(self.fine_endpoints, minlength=self.m * self.n_vertices)

    @property
    def n_vertices(self) -> int:
        return len(self.degrees)

    def edges(self) -> np.ndarray:
        """``(t, 2)`` array of ``(source, target)`` pairs."""
        return self.endpoints.reshape(-1, 2)

    def check(self) -> None:
        """Raise ``AssertionError`` if the stored degrees disagree with the endpoints."""
        assert len(self.endpoints) % 2 == 0
        counts = np.bincount(self.endpoints, minlength=self.n_vertices)
        assert len(counts) == self.n_vertices, "endpoint refers to a missing vertex"
        assert np.array_equal(counts, self.degrees), "degree array out of sync"
        assert int(self.degrees.sum()) == len(self.endpoints)


def step_m1(state: GraphState, rng: np.random.Generator) -> GraphState:
    """Add one fine vertex and its single edge to a ``G_1`` state.

    The target is drawn uniformly from ``2t - 1`` virtual slots: the
    ``2(t - 1)`` existing endpoints, plus one slot for the new vertex itself.
    A vertex of degree ``d`` therefore owns ``d`` slots.
    """
    if state.m != 1:
        raise ValueError("step_m1 operates on the fine process (m == 1)")
    t = state.t + 1
    u = int(rng.integers(0, 2 * t - 1))
    new = t - 1
    target = new if u == 2 * (t - 1) else int(state.fine_endpoints[u])
    endpoints = np.append(state.fine_endpoints, np.array([new, target], dtype=np.int64))
    degrees = np.append(state.degrees, np.int64(0))
    degrees[new] += 1
    degrees[target] += 1
    return GraphState(endpoints, degrees, 1)


def resolve_targets(slots: np.ndarray) -> np.ndarray:
    """Map per-step slot draws to fine target vertices, in place.

    ``slots[i]`` is the uniform draw in ``[0, 2i + 1)`` made at step ``i``
    (0-based).  Even slot ``2j`` is the source of step ``j`` (vertex ``j``, or
    the new vertex itself when ``j == i``); odd slot ``2j + 1`` is whatever
    step ``j`` attached to.  Odd references form chains pointing strictly
    backwards, collapsed here by pointer doubling.  ``slots`` may be a strided
    view; it is overwritten with the targets and returned.
    """
    pending = (slots & 1).astype(bool)
    slots >>= 1
    idx = np.flatnonzero(pending)
    while idx.size:
        ref = slots[idx]
        slots[idx] = slots[ref]
        still = pending[ref]
        pending[idx] = still
        idx = idx[still]
        del ref, still
    return slots


_CHUNK = 1 << 20


def draw_slots(n_steps: int, rng: np.random.Generator, out: np.ndarray | None = None) -> np.ndarray:
    """Slot draws for steps ``0..n_steps-1``; step ``i`` is uniform on ``[0, 2i + 1)``."""
    if out is None:
        out = np.empty(n_steps, dtype=np.int64)
    for lo in range(0, n_steps, _CHUNK):
        hi = min(lo + _CHUNK, n_steps)
        highs = 2 * np.arange(lo, hi, dtype=np.int64) + 1
        out[lo:hi] = rng.integers(0, highs, dtype=np.int64)
    return out


def _coarsen(fine_endpoints: np.ndarray, m: int, n: int) -> GraphState:
    state = GraphState(fine_endpoints, np.zeros(0, dtype=np.int64), m)
    if m == 1:
        state.degrees = np.bincount(fine_endpoints, minlength=n).astype(np.int64)
    else:
        degrees = np.zeros(n, dtype=np.int64)
        for lo in range(0, len(fine_endpoints), _CHUNK):
            part = fine_endpoints[lo:lo + _CHUNK] // m
            degrees += np.bincount(part, minlength=n)
        state.degrees = degrees
    return state


def _fine_endpoints(n_steps: int) -> np.ndarray:
    fine = np.empty(2 * n_steps, dtype=np.int64)
    for lo in range(0, n_steps, _CHUNK):
        hi = min(lo + _CHUNK, n_steps)
        fine[2 * lo:2 * hi:2] = np.arange(lo, hi, dtype=np.int64)
    return fine


def graph_from_slots(slots: np.ndarray, m: int) -> GraphState:
    """Build ``G_m^n`` from a complete vector of slot draws (``len == m*n``)."""
    n_steps = len(slots)
    if n_steps % m:
        raise ValueError("number of fine steps must be a multiple of m")
    fine = _fine_endpoints(n_steps)
    fine[1::2] = slots
    resolve_targets(fine[1::2])
    return _coarsen(fine, m, n_steps // m)


def generate(params: ProcessParams, rng: np.random.Generator | None = None) -> GraphState:
    """Run the fine process for ``m*n`` steps and identify blocks of ``m`` vertices.

    With ``rng`` omitted, a PCG64 generator seeded from ``params.seed`` is used,
    so the result is a pure function of ``params``.
    """
    n_steps = params.m * params.n
    if n_steps > MAX_FINE_EDGES:
        raise GuardError(f"m*n = {n_steps} exceeds the generator limit of {MAX_FINE_EDGES} edges")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    try:
        fine = _fine_endpoints(n_steps)
        targets = draw_slots(n_steps, rng, out=fine[1::2])
        resolve_targets(targets)
        return _coarsen(fine, params.m, params.n)
    except MemoryError as exc:
        raise GuardError(f"out of memory generating {n_steps} edges") from exc


@dataclass(frozen=True)
class Pairing:
    """Perfect matching on ``2L`` points.

    ``partner[i]`` is the partner of point ``i + 1`` (stored 0-based), so the
    chord diagram on points ``1..2L`` is recovered by :meth:`pairs`.
    """

    partner: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.partner, dtype=np.int64)
        object.__setattr__(self, "partner", p)
        size = len(p)
        if size == 0 or size % 2:
            raise ValueError(f"a pairing needs a positive even number of points, got {size}")
        if p.min() < 0 or p.max() >= size:
            raise ValueError("partner index out of range")
        idx = np.arange(size)
        if np.any(p == idx):
            raise ValueError("a point cannot be paired with itself")
        if not np.array_equal(p[p], idx):
            raise ValueError("partner map is not an involution")

    @property
    def n_points(self) -> int:
        return len(self.partner)

    def pairs(self) -> list[tuple[int, int]]:
        """Chords as 1-based ``(left, right)`` tuples sorted by left endpoint."""
        return [(i + 1, int(j) + 1) for i, j in enumerate(self.partner) if i < j]

    @classmethod
    def from_pairs(cls, pairs) -> "Pairing":
        pairs = list(pairs)
        partner = np.full(2 * len(pairs), -1, dtype=np.int64)
        for a, b in pairs:
            a, b = a - 1, b - 1
            if not (0 <= a < len(partner) and 0 <= b < len(partner)):
                raise ValueError(f"chord ({a + 1}, {b + 1}) is out of range")
            if partner[a] != -1 or partner[b] != -1:
                raise ValueError(f"point reused in chord ({a + 1}, {b + 1})")
            partner[a], partner[b] = b, a
        return cls(partner)


def sample_pairing(points: int, rng: np.random.Generator) -> Pairing:
    """Uniform perfect matching of ``points`` points by sequential pairing.

    The smallest unmatched point is matched to a uniform choice among the other
    unmatched points.  A position index over the pool of unmatched points keeps
    each removal O(1).
    """
    if points < 2 or points % 2:
        raise ValueError(f"points must be even and >= 2, got {points}")
    pool = list(range(points))
    where = list(range(points))
    matched = [False] * points
    partner = np.empty(points, dtype=np.int64)

    def remove(p):
        i, last = where[p], pool[-1]
        pool[i] = last
        where[last] = i
        pool.pop()

    low = 0
    for _ in range(points // 2):
        while matched[low]:
            low += 1
        remove(low)
        q = pool[int(rng.integers(0, len(pool)))]
        remove(q)
        matched[low] = matched[q] = True
        partner[low], partner[q] = q, low
    return Pairing(partner)


def pairing_to_graph(pairing: Pairing, m: int = 1) -> GraphState:
    """Read an LCD graph off a chord diagram.

    Scanning left to right, every right endpoint closes a fine vertex made of
    all points since the previous right endpoint.  Each chord becomes an edge
    from the fine vertex holding its right end to the one holding its left
    end.  Blocks of ``m`` fine vertices are then identified, as in
    :func:`generate`.
    """
    if not isinstance(pairing, Pairing):
        pairing = Pairing(pairing)
    partner = pairing.partner
    size = len(partner)
    n_fine = size // 2
    if m < 1 or n_fine % m:
        raise ValueError(f"m={m} must divide the number of chords {n_fine}")
    idx = np.arange(size)
    is_right = partner < idx
    # fine vertex of point p = number of right endpoints strictly before p
    vertex = np.cumsum(is_right) - is_right
    rights = np.flatnonzero(is_right)
    fine = np.empty(size, dtype=np.int64)
    fine[0::2] = vertex[rights]
    fine[1::2] = vertex[partner[rights]]
    return _coarsen(fine, m, n_fine // m)
