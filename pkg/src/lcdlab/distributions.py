"""Degree distributions and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from lcdlab.process import GraphState


@dataclass
class DegreeDistribution:
    """Map ``k -> value`` with declared support bounds.

    ``kind`` is ``"probability"`` for exact or theoretical laws and
    ``"frequency"`` for empirical fractions.  Values are ``float`` or
    ``Fraction``.
    """

    entries: dict[int, float | Fraction]
    kind: str = "probability"
    support_min: int | None = None
    support_max: int | None = None
    truncated_mass: float | Fraction = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("probability", "frequency"):
            raise ValueError(f"unknown kind {self.kind!r}")
        self.entries = {int(k): v for k, v in sorted(self.entries.items())}
        if self.entries:
            lo, hi = min(self.entries), max(self.entries)
            self.support_min = lo if self.support_min is None else self.support_min
            self.support_max = hi if self.support_max is None else self.support_max
            if lo < self.support_min or hi > self.support_max:
                raise ValueError("entry outside declared support")
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("negative mass")

    def __getitem__(self, k: int):
        return self.entries.get(k, 0)

    def total(self):
        return sum(self.entries.values())

    @property
    def is_exact(self) -> bool:
        return any(isinstance(v, Fraction) for v in self.entries.values())

    def as_float(self) -> "DegreeDistribution":
        return DegreeDistribution(
            {k: float(v) for k, v in self.entries.items()},
            self.kind,
            self.support_min,
            self.support_max,
            float(self.truncated_mass),
            dict(self.meta),
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.fromiter(self.entries, dtype=np.int64, count=len(self.entries))
        vs = np.array([float(v) for v in self.entries.values()], dtype=float)
        return ks, vs


def degree_histogram(graph: GraphState, coarse: bool = True) -> DegreeDistribution:
    """Empirical frequency of total degree over the vertices of ``graph``.

    ``coarse=False`` histograms the underlying fine vertices instead.
    """
    degrees = graph.degrees if coarse else graph.fine_degrees()
    counts = np.bincount(degrees)
    n = len(degrees)
    ks = np.flatnonzero(counts)
    entries = {int(k): counts[k] / n for k in ks}
    return DegreeDistribution(entries, kind="frequency", meta={"count": n})


def format_float(v) -> str:
    return f"{float(v):.17g}"


def distribution_csv(dist: DegreeDistribution | Mapping[int, float | Fraction], rational: bool | None = None) -> str:
    """CSV text with header ``k,value`` or, for exact values, ``k,numerator,denominator``."""
    entries = dist.entries if isinstance(dist, DegreeDistribution) else dict(sorted(dist.items()))
    if rational is None:
        rational = any(isinstance(v, Fraction) for v in entries.values())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rational:
        writer.writerow(["k", "numerator", "denominator"])
        for k, v in entries.items():
            v = Fraction(v)
            writer.writerow([k, v.numerator, v.denominator])
    else:
        writer.writerow(["k", "value"])
        for k, v in entries.items():
            writer.writerow([k, format_float(v)])
    return buf.getvalue()


def read_distribution_csv(text: str) -> dict[int, float | Fraction]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if header == ["k", "value"]:
        return {int(r[0]): float(r[1]) for r in body}
    if header == ["k", "numerator", "denominator"]:
        return {int(r[0]): Fraction(int(r[1]), int(r[2])) for r in body}
    raise ValueError(f"unrecognised header {header}")


def edge_list_text(graph: GraphState) -> str:
    """One ``src dst`` line per edge, vertices numbered from 1."""
    edges = graph.edges() + 1
    return "".join(f"{a} {b}\n" for a, b in edges.tolist())
