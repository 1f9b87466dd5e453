"""Finite unions of compact intervals, the Hausdorff metric and metric pairs.

A :class:`CompactSet` is the value type of a set-valued function sample. It is
normalised on construction: intervals are sorted and any two intervals whose
gap is at most :data:`TAU_MERGE` are merged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError

TAU_MERGE = 1e-9
# relative slack used to decide that two distances are equal
TIE_RTOL = 1e-12


class Interval(NamedTuple):
    lo: float
    hi: float


class MetricPair(NamedTuple):
    v: float
    w: float


def _normalise(intervals: Iterable[Sequence[float]]) -> tuple[Interval, ...]:
    items = []
    for lo, hi in intervals:
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError(f"non-finite interval [{lo}, {hi}]")
        if lo > hi:
            if lo - hi > TAU_MERGE:
                raise ValueError(f"inverted interval [{lo}, {hi}]")
            lo = hi = 0.5 * (lo + hi)
        items.append((lo, hi))
    items.sort()
    merged: list[list[float]] = []
    for lo, hi in items:
        if merged and lo - merged[-1][1] <= TAU_MERGE:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple(Interval(lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class CompactSet:
    """Ascending union of disjoint closed intervals."""

    intervals: tuple[Interval, ...]

    def __init__(self, intervals: Iterable[Sequence[float]] = ()):
        object.__setattr__(self, "intervals", _normalise(intervals))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "CompactSet":
        return cls([(lo, hi)])

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __repr__(self) -> str:
        body = " U ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in self.intervals)
        return f"CompactSet({body or 'empty'})"

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lo(self) -> float:
        self._require_nonempty()
        return self.intervals[0].lo

    @property
    def hi(self) -> float:
        self._require_nonempty()
        return self.intervals[-1].hi

    def endpoints(self) -> np.ndarray:
        """Ascending interval endpoints; a degenerate interval contributes one point."""
        pts: list[float] = []
        for lo, hi in self.intervals:
            pts.append(lo)
            if hi != lo:
                pts.append(hi)
        return np.asarray(pts, dtype=float)

    def gaps(self) -> list[tuple[float, float]]:
        """Open gaps (hi_k, lo_{k+1}) between consecutive intervals."""
        iv = self.intervals
        return [(iv[k].hi, iv[k + 1].lo) for k in range(len(iv) - 1)]

    def contains(self, p: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= p <= hi + tol for lo, hi in self.intervals)

    def interval_containing(self, p: float, tol: float = 0.0) -> int | None:
        for k, (lo, hi) in enumerate(self.intervals):
            if lo - tol <= p <= hi + tol:
                return k
        return None

    def union(self, other: "CompactSet") -> "CompactSet":
        return CompactSet(self.intervals + other.intervals)

    def _require_nonempty(self) -> None:
        if not self.intervals:
            raise DomainError("operation on an empty CompactSet")

    def _bounds(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.asarray(self.intervals, dtype=float)
        return arr[:, 0], arr[:, 1]


def distances_to_set(points: np.ndarray | Sequence[float], A: CompactSet) -> np.ndarray:
    """Vectorised d(p, A) for every p in ``points``."""
    A._require_nonempty()
    p = np.asarray(points, dtype=float)
    los, his = A._bounds()
    idx = np.searchsorted(los, p, side="right") - 1
    out = np.empty_like(p)
    left = idx < 0
    out[left] = los[0] - p[left]
    inner = ~left
    j = idx[inner]
    q = p[inner]
    below_hi = np.maximum(q - his[j], 0.0)
    nxt = np.minimum(j + 1, len(los) - 1)
    to_next = np.where(j + 1 < len(los), los[nxt] - q, np.inf)
    out[inner] = np.minimum(below_hi, to_next)
    return out


def point_to_set_distance(p: float, A: CompactSet) -> float:
    """min over q in A of |p - q|."""
    if A.is_empty:
        raise DomainError("distance to an empty set")
    return float(distances_to_set(np.array([p]), A)[0])


def _directed(A: CompactSet, B: CompactSet) -> float:
    # sup_{a in A} d(a, B) is attained at an endpoint of A or at the midpoint
    # of a gap of B lying inside A
    cand = [A.endpoints()]
    mids = [0.5 * (lo + hi) for lo, hi in B.gaps()]
    mids = [m for m in mids if A.contains(m)]
    if mids:
        cand.append(np.asarray(mids))
    return float(np.max(distances_to_set(np.concatenate(cand), B)))


def hausdorff(A: CompactSet, B: CompactSet) -> float:
    """Hausdorff distance between two nonempty interval unions, computed exactly."""
    if A.is_empty or B.is_empty:
        raise DomainError("Hausdorff distance of an empty set")
    return max(_directed(A, B), _directed(B, A))


def as_point_set(values: Iterable[float]) -> np.ndarray:
    """Sorted array of distinct reals (a discrete point set)."""
    arr = np.unique(np.asarray(list(values), dtype=float))
    if arr.size == 0:
        raise DomainError("empty point set")
    return arr


def _nearest_indices(p: float, W: np.ndarray) -> list[int]:
    j = int(np.searchsorted(W, p))
    cand = [i for i in (j - 1, j) if 0 <= i < len(W)]
    dist = [abs(p - W[i]) for i in cand]
    best = min(dist)
    tol = TIE_RTOL * max(1.0, abs(p), best)
    return [i for i, d in zip(cand, dist) if d - best <= tol]


def metric_pair_indices(V: np.ndarray, W: np.ndarray) -> list[tuple[int, int]]:
    """Index pairs (i, j) with (V[i], W[j]) in Pi(V, W); V and W sorted and distinct.

    Equidistant neighbours produce both pairs.
    """
    pairs = set()
    for i, v in enumerate(V):
        for j in _nearest_indices(v, W):
            pairs.add((i, j))
    for j, w in enumerate(W):
        for i in _nearest_indices(w, V):
            pairs.add((i, j))
    return sorted(pairs)


def metric_pairs(V: Iterable[float], W: Iterable[float]) -> list[MetricPair]:
    V, W = as_point_set(V), as_point_set(W)
    return [MetricPair(float(V[i]), float(W[j])) for i, j in metric_pair_indices(V, W)]


def metric_chains(sets: Sequence[Iterable[float]]) -> list[tuple[float, ...]]:
    """All metric chains (v_0, ..., v_N) of a finite sequence of finite sets."""
    pts = [as_point_set(s) for s in sets]
    if not pts:
        return []
    succ = [dict() for _ in pts[:-1]]
    for k in range(len(pts) - 1):
        for i, j in metric_pair_indices(pts[k], pts[k + 1]):
            succ[k].setdefault(i, []).append(j)
    chains: list[tuple[int, ...]] = [(i,) for i in range(len(pts[0]))]
    for k in range(len(pts) - 1):
        chains = [c + (j,) for c in chains for j in succ[k].get(c[-1], [])]
    return [tuple(float(pts[k][i]) for k, i in enumerate(c)) for c in chains]


def metric_linear_combination(sets: Sequence[Iterable[float]],
                              weights: Sequence[float]) -> np.ndarray:
    """{sum_i w_i v_i : (v_0, ..., v_N) a metric chain of ``sets``}, ascending."""
    if len(sets) != len(weights):
        raise ValueError("sets and weights differ in length")
    w = np.asarray(weights, dtype=float)
    values = [float(np.dot(w, c)) for c in metric_chains(sets)]
    return np.unique(np.asarray(values))


def unions(*sets: CompactSet) -> CompactSet:
    return CompactSet(itertools.chain.from_iterable(s.intervals for s in sets))
