"""Significant metric chains of a sample sequence.

Layer i of the chain forest holds the augmented discrete sample T_i: the
interval endpoints of F(x_i), the approximated PCT points (gap midpoints of a
neighbouring sample that fall inside F(x_i)) and the extended PCT points
(APCT values carried sideways while they stay inside the samples). Edges join
metric pairs of consecutive layers, so every root-to-leaf path is a
significant metric chain.

The forest is stored as a layered DAG: a node reached by several parents is
stored once, which leaves the set of root-to-leaf paths unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AmbiguousGapError, ClassificationError
from .sets import metric_pair_indices
from .svf_model import SampleSet

log = logging.getLogger(__name__)

MEMBER_TOL = 1e-9
# two candidate points closer than this are the same node
SAME_POINT_TOL = 1e-12
MAX_PATHS = 200_000

ENDPOINT, APCT, EXTENDED = "endpoint", "apct", "extended_pct"
_ROLE_RANK = {ENDPOINT: 0, APCT: 1, EXTENDED: 2}


def discretize(S: SampleSet) -> list[np.ndarray]:
    """Endpoints of the maximal intervals of every sample, ascending."""
    return [v.endpoints() for v in S.values]


def detect_apct(S: SampleSet) -> list[list[float]]:
    """Approximated PCT points per node.

    A gap midpoint of an immediate neighbour j of node i belongs to APCT(x_i)
    when it lies in F(x_i) but not in F(x_j).
    """
    n = len(S)
    out: list[list[float]] = [[] for _ in range(n)]
    for i in range(n):
        here = S.values[i]
        found = []
        for j in (i - 1, i + 1):
            if not 0 <= j < n:
                continue
            there = S.values[j]
            for lo, hi in there.gaps():
                p = 0.5 * (lo + hi)
                if here.contains(p, MEMBER_TOL) and not there.contains(p):
                    found.append(p)
        out[i] = sorted(set(found))
    return out


def extend_pcts(S: SampleSet, apcts: Sequence[Sequence[float]]
                ) -> list[tuple[list[float], list[float]]]:
    """(EP_R, EP_L) per node.

    EP_R(x_i) holds the APCT values of nodes j < i that stay inside every
    sample from x_{j+1} through x_i; EP_L is the mirror image.
    """
    n = len(S)
    right: list[set] = [set() for _ in range(n)]
    left: list[set] = [set() for _ in range(n)]
    for j in range(n):
        for p in apcts[j]:
            for i in range(j + 1, n):
                if not S.values[i].contains(p, MEMBER_TOL):
                    break
                right[i].add(p)
            for i in range(j - 1, -1, -1):
                if not S.values[i].contains(p, MEMBER_TOL):
                    break
                left[i].add(p)
    return [(sorted(r), sorted(l)) for r, l in zip(right, left)]


@dataclass(frozen=True)
class AugmentedSample:
    node_index: int
    points: np.ndarray
    roles: tuple[str, ...]


def augment(S: SampleSet) -> list[AugmentedSample]:
    zeta = discretize(S)
    apcts = detect_apct(S)
    eps = extend_pcts(S, apcts)
    layers = []
    for i in range(len(S)):
        tagged = [(p, ENDPOINT) for p in zeta[i]]
        tagged += [(p, APCT) for p in apcts[i]]
        tagged += [(p, EXTENDED) for p in eps[i][0] + eps[i][1]]
        tagged.sort(key=lambda t: (t[0], _ROLE_RANK[t[1]]))
        pts: list[float] = []
        roles: list[str] = []
        for p, role in tagged:
            if pts and p - pts[-1] <= SAME_POINT_TOL * max(1.0, abs(p)):
                if _ROLE_RANK[role] < _ROLE_RANK[roles[-1]]:
                    roles[-1] = role
                continue
            pts.append(float(p))
            roles.append(role)
        layers.append(AugmentedSample(i, np.asarray(pts), tuple(roles)))
    return layers


@dataclass(frozen=True)
class ChainForest:
    layers: tuple[AugmentedSample, ...]
    # children[i][k]: indices in layer i + 1 of the children of node k of layer i
    children: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def path_count(self) -> int:
        counts = np.ones(len(self.layers[-1].points), dtype=object)
        for i in range(len(self.layers) - 2, -1, -1):
            counts = np.array([sum(counts[c] for c in ch) for ch in self.children[i]],
                              dtype=object)
        return int(sum(counts))

    def dump(self) -> str:
        """Adjacency listing: layer, value, role and the child values."""
        lines = ["root -> layer 0: " + ", ".join(f"{p:.10g}" for p in self.layers[0].points)]
        for i, layer in enumerate(self.layers):
            for k, (p, role) in enumerate(zip(layer.points, layer.roles)):
                if i + 1 < len(self.layers):
                    nxt = self.layers[i + 1].points
                    kids = ", ".join(f"{nxt[c]:.10g}" for c in self.children[i][k])
                else:
                    kids = "(leaf)"
                lines.append(f"layer {i} value {p:.10g} role {role} -> {kids}")
        return "\n".join(lines) + "\n"


def build_chain_forest(S: SampleSet) -> ChainForest:
    layers = augment(S)
    children = []
    for i in range(len(layers) - 1):
        kids: list[list[int]] = [[] for _ in layers[i].points]
        for a, b in metric_pair_indices(layers[i].points, layers[i + 1].points):
            kids[a].append(b)
        children.append(tuple(tuple(k) for k in kids))
    return ChainForest(tuple(layers), tuple(children))


@dataclass(frozen=True)
class Chain:
    values: tuple[float, ...]
    label: str = "unclassified"
    hole: int | None = None  # 1-based hole number for hole labels

    @property
    def tag(self) -> str:
        return f"{self.label}({self.hole})" if self.hole is not None else self.label


def enumerate_chains(forest: ChainForest) -> list[Chain]:
    """All root-to-leaf paths (the root stripped), in pre-order."""
    total = forest.path_count()
    if total > MAX_PATHS:
        raise ClassificationError(f"{total} significant chains; refusing to enumerate")
    out: list[Chain] = []
    pts = [layer.points for layer in forest.layers]
    last = len(pts) - 1
    # iterative pre-order traversal
    stack = [(0, k, (float(pts[0][k]),)) for k in reversed(range(len(pts[0])))]
    while stack:
        i, k, vals = stack.pop()
        if i == last:
            out.append(Chain(vals))
            continue
        for c in reversed(forest.children[i][k]):
            stack.append((i + 1, c, vals + (float(pts[i + 1][c]),)))
    return out


# --- holes as runs of gaps ---------------------------------------------------

@dataclass(frozen=True)
class GapRun:
    """Consecutive nodes n..m whose samples show the gap of one hole."""

    hole: int
    n: int
    m: int
    lower: tuple[float, ...]  # g(x_n), ..., g(x_m)
    upper: tuple[float, ...]  # h(x_n), ..., h(x_m)

    @property
    def nodes(self) -> range:
        return range(self.n, self.m + 1)

    def cap_value(self, side: str) -> float:
        """Coarse PCT height: midpoint of the first (left) or last (right) gap."""
        k = 0 if side == "left" else -1
        return 0.5 * (self.lower[k] + self.upper[k])


def find_gap_runs(S: SampleSet) -> list[GapRun]:
    """Group the gaps of consecutive samples into holes by overlap."""
    gaps = [v.gaps() for v in S.values]
    runs: list[list[tuple[int, int]]] = []  # list of (node, gap index)
    open_runs: dict[int, int] = {}  # gap index at previous node -> run id
    for i, gi in enumerate(gaps):
        nxt: dict[int, int] = {}
        claimed: dict[int, int] = {}
        prev = gaps[i - 1] if i > 0 else []
        for k, (lo, hi) in enumerate(gi):
            links = [kp for kp, (plo, phi) in enumerate(prev)
                     if kp in open_runs and max(lo, plo) < min(hi, phi)]
            if len(links) > 1:
                raise AmbiguousGapError(
                    f"gap {k} at node {i} overlaps {len(links)} gaps at node {i - 1}")
            if links:
                kp = links[0]
                if kp in claimed:
                    raise AmbiguousGapError(
                        f"gap {kp} at node {i - 1} overlaps several gaps at node {i}")
                claimed[kp] = k
                rid = open_runs[kp]
                runs[rid].append((i, k))
            else:
                rid = len(runs)
                runs.append([(i, k)])
            nxt[k] = rid
        open_runs = nxt
    out = []
    for members in sorted(runs, key=lambda r: (r[0][0], gaps[r[0][0]][r[0][1]][0])):
        n, m = members[0][0], members[-1][0]
        out.append(GapRun(len(out) + 1, n, m,
                          tuple(gaps[i][k][0] for i, k in members),
                          tuple(gaps[i][k][1] for i, k in members)))
    return out


def _matches(values: Sequence[float], target: Sequence[float], tol: float = 1e-12) -> bool:
    return all(abs(v - t) <= tol * max(1.0, abs(t)) for v, t in zip(values, target))


def classify_chains(chains: Sequence[Chain], S: SampleSet) -> list[Chain]:
    """Label every chain as upper, lower, hole_upper(i), hole_lower(i) or unclassified.

    Per hole one lower and one upper representative is kept. Candidates whose
    values at the neighbouring nodes n-1 and m+1 equal the coarse PCT caps are
    preferred; ties go to the lexicographically smallest value sequence.
    """
    tops = [v.hi for v in S.values]
    bottoms = [v.lo for v in S.values]
    runs = find_gap_runs(S)
    N = len(S) - 1
    labels: dict[int, tuple[str, int | None]] = {}

    for idx, ch in enumerate(chains):
        if _matches(ch.values, tops):
            labels[idx] = ("upper", None)
        elif _matches(ch.values, bottoms):
            labels[idx] = ("lower", None)
    if "upper" not in {lab for lab, _ in labels.values()}:
        raise ClassificationError("no chain follows the upper boundary")
    if "lower" not in {lab for lab, _ in labels.values()}:
        raise ClassificationError("no chain follows the lower boundary")

    for run in runs:
        caps = {}
        if run.n > 0:
            caps[run.n - 1] = run.cap_value("left")
        if run.m < N:
            caps[run.m + 1] = run.cap_value("right")
        for side, target in (("hole_lower", run.lower), ("hole_upper", run.upper)):
            cands = [idx for idx, ch in enumerate(chains)
                     if idx not in labels and _matches(ch.values[run.n:run.m + 1], target)]
            if not cands:
                raise ClassificationError(f"no chain tracks the {side} of hole {run.hole}")
            capped = [idx for idx in cands
                      if all(_matches([chains[idx].values[i]], [v]) for i, v in caps.items())]
            pool = capped or cands
            best = min(pool, key=lambda idx: chains[idx].values)
            labels[best] = (side, run.hole)

    bound = 2 + 4 * len(runs)
    if len(chains) > bound:
        log.warning("%d significant chains exceed the regression bound %d", len(chains), bound)
    out = []
    for idx, ch in enumerate(chains):
        label, hole = labels.get(idx, ("unclassified", None))
        out.append(Chain(ch.values, label, hole))
    return out


@dataclass(frozen=True)
class BoundaryChain:
    hole: int
    side: str  # "lower" or "upper"
    n: int
    m: int
    nodes: tuple[float, ...]
    values: tuple[float, ...]


def extract_boundary_chains(S: SampleSet) -> list[BoundaryChain]:
    """Lower and upper boundary chains of every hole, restricted to its gap nodes."""
    out = []
    for run in find_gap_runs(S):
        xs = tuple(float(x) for x in S.nodes[run.n:run.m + 1])
        out.append(BoundaryChain(run.hole, "lower", run.n, run.m, xs, run.lower))
        out.append(BoundaryChain(run.hole, "upper", run.n, run.m, xs, run.upper))
    return out


def labeled_chains(S: SampleSet) -> list[Chain]:
    return classify_chains(enumerate_chains(build_chain_forest(S)), S)
