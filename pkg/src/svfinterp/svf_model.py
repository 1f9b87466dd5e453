"""Analytic set-valued functions given by their boundary curves.

A model in the class F([a, b], M) is described by a lower boundary ``ell``,
an upper boundary ``u`` and M separable holes, each bounded below by ``g``
and above by ``h`` on an open interval (c, d). Evaluation at x collects the
holes active at x and removes their gaps from [ell(x), u(x)].
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._io import atomic_write_json
from .errors import DomainError, ModelInconsistencyError, SampleFileError
from .kernels import bracketed_root
from .sets import TAU_MERGE, CompactSet

log = logging.getLogger(__name__)

# slack for x at the ends of [a, b]
DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryFn:
    fn: Callable[[float], float]
    lo: float
    hi: float

    def __call__(self, x: float) -> float:
        return float(self.fn(x))


@dataclass(frozen=True)
class HoleSpec:
    c: float
    d: float
    g: BoundaryFn  # lower boundary of the hole
    h: BoundaryFn  # upper boundary of the hole

    def contains(self, x: float) -> bool:
        return self.c < x < self.d

    @property
    def pct_left(self) -> tuple[float, float]:
        return self.c, 0.5 * (self.g(self.c) + self.h(self.c))

    @property
    def pct_right(self) -> tuple[float, float]:
        return self.d, 0.5 * (self.g(self.d) + self.h(self.d))


@dataclass(frozen=True)
class SvfModel:
    a: float
    b: float
    ell: BoundaryFn
    u: BoundaryFn
    holes: tuple[HoleSpec, ...] = ()
    name: str = "custom"

    def __call__(self, x: float) -> CompactSet:
        return evaluate(self, x)

    def validate(self, samples: int = 401) -> list[str]:
        """Check the class invariants on a grid; returns warnings for the soft ones."""
        warnings = []
        xs = np.linspace(self.a, self.b, samples)
        if any(self.ell(x) >= self.u(x) for x in xs):
            raise ModelInconsistencyError("ell >= u somewhere on [a, b]")
        for hole in self.holes:
            if not self.a < hole.c < hole.d < self.b:
                raise ModelInconsistencyError(f"hole ({hole.c}, {hole.d}) not inside (a, b)")
            for x in (hole.c, hole.d):
                if abs(hole.g(x) - hole.h(x)) > 1e-12:
                    raise ModelInconsistencyError(f"hole does not close at x={x}")
            inner = np.linspace(hole.c, hole.d, 51)[1:-1]
            if any(hole.g(x) >= hole.h(x) for x in inner):
                raise ModelInconsistencyError("hole with g >= h inside (c, d)")
            lo_all = max(self.ell(x) for x in xs)
            hi_all = min(self.u(x) for x in xs)
            y0, y1 = hole.g(hole.c), hole.g(hole.d)
            if not (lo_all < y0 < hi_all and lo_all < y1 < hi_all):
                warnings.append(
                    f"hole ({hole.c:.4g}, {hole.d:.4g}): PCT heights outside "
                    "(max ell, min u); convergence proof assumptions not met")
        for msg in warnings:
            log.warning(msg)
        return warnings


def evaluate(F: SvfModel, x: float) -> CompactSet:
    """F(x) = [ell, g_1] U [h_1, g_2] U ... U [h_J, u] over the holes open at x."""
    if not F.a - DOMAIN_TOL <= x <= F.b + DOMAIN_TOL:
        raise DomainError(f"x={x} outside [{F.a}, {F.b}]")
    lo, hi = F.ell(x), F.u(x)
    gaps = sorted(tuple(sorted((hole.g(x), hole.h(x)))) for hole in F.holes if hole.contains(x))
    edges = [lo]
    for g, h in gaps:
        edges += [g, h]
    edges.append(hi)
    intervals = []
    for k in range(0, len(edges), 2):
        left, right = edges[k], edges[k + 1]
        if left > right + TAU_MERGE:
            raise ModelInconsistencyError(
                f"{F.name}: interval [{left}, {right}] inverted at x={x}")
        intervals.append((min(left, right), right))
    return CompactSet(intervals)


# --- partitions and samples --------------------------------------------------

@dataclass(frozen=True)
class Partition:
    nodes: np.ndarray
    kind: str
    a: float
    b: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("partition needs at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("partition nodes must be strictly ascending")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def norm(self) -> float:
        """Largest gap between consecutive nodes."""
        return float(np.diff(self.nodes).max()) if self.nodes.size > 1 else 0.0


def chebyshev_partition(N: int, a: float, b: float) -> Partition:
    """The N + 1 roots of T_{N+1} mapped to [a, b], ascending."""
    if N < 0 or not a < b:
        raise ValueError("need N >= 0 and a < b")
    i = np.arange(N + 1)
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos((2 * i + 1) * np.pi / (2 * N + 2))
    x = np.sort(x)
    if N % 2 == 0:
        x[N // 2] = 0.5 * (a + b)
    return Partition(x, "chebyshev", a, b)


def uniform_partition(N: int, a: float, b: float) -> Partition:
    """x_i = a + i (b - a) / N, i = 0..N."""
    if N < 1 or not a < b:
        raise ValueError("need N >= 1 and a < b")
    x = a + np.arange(N + 1) * ((b - a) / N)
    x[-1] = b
    return Partition(x, "uniform", a, b)


def make_partition(kind: str, N: int, a: float, b: float) -> Partition:
    if kind == "chebyshev":
        return chebyshev_partition(N, a, b)
    if kind == "uniform":
        return uniform_partition(N, a, b)
    raise ValueError(f"unknown partition kind {kind!r}")


@dataclass(frozen=True)
class SampleSet:
    partition: Partition
    values: tuple[CompactSet, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != len(self.partition):
            raise ValueError("one sample value per partition node required")
        if any(v.is_empty for v in self.values):
            raise ValueError("empty sample value")

    @property
    def nodes(self) -> np.ndarray:
        return self.partition.nodes

    def __len__(self) -> int:
        return len(self.values)


def sample(F: SvfModel, X: Partition) -> SampleSet:
    return SampleSet(X, tuple(evaluate(F, x) for x in X.nodes), {"model": F.name})


# --- sample files ------------------------------------------------------------

def sample_to_dict(S: SampleSet) -> dict:
    doc = {
        "a": S.partition.a,
        "b": S.partition.b,
        "nodes": [float(x) for x in S.nodes],
        "values": [[[iv.lo, iv.hi] for iv in v] for v in S.values],
        "kind": S.partition.kind,
    }
    if "model" in S.meta:
        doc["model"] = S.meta["model"]
    return doc


def sample_from_dict(doc: dict) -> SampleSet:
    try:
        a, b = float(doc["a"]), float(doc["b"])
        nodes = [float(x) for x in doc["nodes"]]
        raw = doc["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SampleFileError(f"malformed sample document: {exc}") from exc
    if len(raw) != len(nodes):
        raise SampleFileError("nodes and values differ in length")
    if any(n2 <= n1 for n1, n2 in zip(nodes, nodes[1:])):
        raise SampleFileError("nodes are not strictly ascending")
    if nodes and not (a - DOMAIN_TOL <= nodes[0] and nodes[-1] <= b + DOMAIN_TOL):
        raise SampleFileError("nodes outside [a, b]")
    values = []
    for i, ivs in enumerate(raw):
        try:
            pairs = [(float(lo), float(hi)) for lo, hi in ivs]
        except (TypeError, ValueError) as exc:
            raise SampleFileError(f"value {i}: intervals must be [lo, hi] pairs") from exc
        if not pairs:
            raise SampleFileError(f"value {i}: empty set")
        for lo, hi in pairs:
            if lo > hi:
                raise SampleFileError(f"value {i}: inverted interval [{lo}, {hi}]")
        for (_, hi1), (lo2, _) in zip(pairs, pairs[1:]):
            if not hi1 < lo2:
                raise SampleFileError(f"value {i}: intervals not disjoint and ascending")
        values.append(CompactSet(pairs))
    X = Partition(np.array(nodes), doc.get("kind", "general"), a, b)
    meta = {"model": doc["model"]} if "model" in doc else {}
    return SampleSet(X, tuple(values), meta)


def write_sample_file(path, S: SampleSet) -> None:
    atomic_write_json(path, sample_to_dict(S))


def read_sample_file(path) -> SampleSet:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SampleFileError(f"{path}: not JSON ({exc})") from exc
    return sample_from_dict(doc)


# --- built-in test functions -------------------------------------------------

def _fa() -> SvfModel:
    a, b = -1.0, 1.0
    full = lambda f: BoundaryFn(f, a, b)
    ell = full(lambda x: -math.tanh(-x) - 1.0)
    u = full(lambda x: math.tanh(-x) + 1.0)
    # the two left holes close where cosh(2x + 1) = 3/2, the right one where
    # cosh(2x - 1) = 5/4
    r1 = math.acosh(1.5)
    c1, d1 = (-1.0 - r1) / 2, (-1.0 + r1) / 2
    r3 = math.acosh(1.25)
    c3, d3 = (1.0 - r3) / 2, (1.0 + r3) / 2
    sech1 = lambda x: 1.0 / math.cosh(2 * x + 1)
    sech3 = lambda x: 1.0 / math.cosh(2 * x - 1)
    holes = (
        HoleSpec(c1, d1, BoundaryFn(lambda x: -sech1(x), c1, d1),
                 BoundaryFn(lambda x: sech1(x) - 4 / 3, c1, d1)),
        HoleSpec(c1, d1, BoundaryFn(lambda x: -sech1(x) + 4 / 3, c1, d1),
                 BoundaryFn(sech1, c1, d1)),
        HoleSpec(c3, d3, BoundaryFn(lambda x: -sech3(x) + 4 / 5, c3, d3),
                 BoundaryFn(lambda x: sech3(x) - 4 / 5, c3, d3)),
    )
    return SvfModel(a, b, ell, u, holes, "FA")


def fb_hole_end() -> float:
    """Positive root of cos(2x)/2 + cos(3x)/3 on [0.6, 0.7]."""
    return bracketed_root(lambda x: math.cos(2 * x) / 2 + math.cos(3 * x) / 3, 0.6, 0.7,
                          tol=1e-12, max_iter=200)


def _fb() -> SvfModel:
    a, b = -1.0, 1.0
    xa = fb_hole_end()
    ell = BoundaryFn(lambda x: -math.exp(x), a, b)
    u = BoundaryFn(math.exp, a, b)
    hole = HoleSpec(-xa, xa, BoundaryFn(lambda x: -math.cos(3 * x) / 3, -xa, xa),
                    BoundaryFn(lambda x: math.cos(2 * x) / 2, -xa, xa))
    return SvfModel(a, b, ell, u, (hole,), "FB")


def _fc() -> SvfModel:
    a, b = -1.0, 1.0
    semi = lambda x: math.sqrt(max(0.0, 1.0 - 4.0 * x * x))
    hole = HoleSpec(-0.5, 0.5, BoundaryFn(lambda x: -semi(x), -0.5, 0.5),
                    BoundaryFn(semi, -0.5, 0.5))
    return SvfModel(a, b, BoundaryFn(lambda x: -1.5, a, b), BoundaryFn(lambda x: 1.5, a, b),
                    (hole,), "FC")


_BUILTINS = {"FA": _fa, "FB": _fb, "FC": _fc}


def builtin(name: str) -> SvfModel:
    try:
        return _BUILTINS[name.upper()]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_BUILTINS)}") from None


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def boundary_functions(F: SvfModel) -> list[BoundaryFn]:
    out = [F.ell, F.u]
    for hole in F.holes:
        out += [hole.g, hole.h]
    return out


def lipschitz_estimate(F: SvfModel, samples: int = 2001) -> float:
    """max |f'| over all boundary functions by central differences."""
    best = 0.0
    for f in boundary_functions(F):
        xs = np.linspace(f.lo, f.hi, samples)
        ys = np.array([f(x) for x in xs])
        best = max(best, float(np.max(np.abs(np.diff(ys) / np.diff(xs)))))
    return best


def sample_model(name: str, kind: str, N: int) -> SampleSet:
    F = builtin(name)
    return sample(F, make_partition(kind, N, F.a, F.b))


__all__ = [
    "BoundaryFn", "HoleSpec", "SvfModel", "Partition", "SampleSet",
    "evaluate", "sample", "chebyshev_partition", "uniform_partition", "make_partition",
    "builtin", "builtin_names", "fb_hole_end", "read_sample_file", "write_sample_file",
    "sample_to_dict", "sample_from_dict", "lipschitz_estimate", "sample_model",
]
