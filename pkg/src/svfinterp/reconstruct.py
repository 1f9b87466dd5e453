"""Reconstruction of a set-valued function from its samples.

Three pipelines share one output type, :class:`Approximant`:

* ``metric-poly``: polynomial interpolation of every labeled significant
  chain over all nodes; holes are capped at the coarse PCT estimates.
* ``c4``: not-a-knot splines for smooth boundaries, with PCTs refined by
  intersecting local cubics.
* ``holder``: boundaries with square-root behaviour at the PCTs. PCTs come
  from a reflected polynomial fit; the singular parts near each PCT are
  removed with half-power expansions before splining.

An approximant at x is [ell(x), u(x)] minus the open gaps (g(x), h(x)) of
the holes whose extension interval contains x.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._io import atomic_write_json
from .chains import BoundaryChain, extract_boundary_chains, find_gap_runs, labeled_chains
from .errors import DomainError, NoRootInBracket, ReconstructionError, SampleFileError
from .kernels import (CubicSpline, PolyInterpolant, SingularExpansion, bracketed_root, poly_fit,
                      poly_extremum_on_interval, singular_fit, spline_fit_not_a_knot)
from .sets import CompactSet
from .svf_model import SampleSet

# half-width of the extension beyond [c~, d~], in units of the local spacing
EXTENSION_FACTOR = 2.0
DOMAIN_TOL = 1e-12
DEFAULT_K = 3
DEFAULT_R = 4

METHODS = ("metric-poly", "c4", "holder")


@dataclass(frozen=True)
class BoundaryCurve:
    """A boundary approximation on [lo, hi], held constant outside it."""

    kind: str  # polynomial | spline | spline_plus_singular
    lo: float
    hi: float
    poly: PolyInterpolant | None = None
    spline: CubicSpline | None = None
    singular: tuple[SingularExpansion, ...] = ()

    def __post_init__(self):
        if self.kind not in ("polynomial", "spline", "spline_plus_singular"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if not self.lo <= self.hi:
            raise ValueError("curve interval is inverted")

    def __call__(self, x):
        xs = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        if self.kind == "polynomial":
            return self.poly(xs)
        out = self.spline(xs)
        for part in self.singular:
            out = out + part(xs)
        return out


@dataclass(frozen=True)
class ApproxHole:
    c: float
    d: float
    lower: BoundaryCurve
    upper: BoundaryCurve
    pct_left: tuple[float, float]
    pct_right: tuple[float, float]
    ext_lo: float
    ext_hi: float
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.c < self.d:
            raise ValueError(f"hole interval [{self.c}, {self.d}] is empty")

    def active(self, x: float) -> bool:
        return self.ext_lo <= x <= self.ext_hi


@dataclass(frozen=True)
class Approximant:
    a: float
    b: float
    ell: BoundaryCurve
    u: BoundaryCurve
    holes: tuple[ApproxHole, ...]
    method: str
    params: dict = field(default_factory=dict)

    def __call__(self, x: float) -> CompactSet:
        return evaluate_approximant(self, x)


def _subtract_gaps(lo: float, hi: float, gaps: list[tuple[float, float]]) -> CompactSet:
    pieces = []
    cur = lo
    for glo, ghi in sorted(gaps):
        if ghi <= cur:
            continue
        if glo >= hi:
            break
        if glo > cur:
            pieces.append((cur, glo))
        cur = ghi
    if cur <= hi:
        pieces.append((cur, hi))
    if not pieces:
        # the gaps swallowed everything; keep the closed ends
        pieces = [(lo, lo), (hi, hi)]
    return CompactSet(pieces)


def evaluate_approximant(A: Approximant, x: float) -> CompactSet:
    """[ell(x), u(x)] minus the open gaps of the holes active at x.

    A hole whose reconstructed lower curve lies above the upper one at x
    contributes no gap there.
    """
    x = float(x)
    if not A.a - DOMAIN_TOL <= x <= A.b + DOMAIN_TOL:
        raise DomainError(f"x = {x} outside [{A.a}, {A.b}]")
    lo, hi = float(A.ell(x)), float(A.u(x))
    if lo > hi:
        lo, hi = hi, lo
    gaps = []
    for hole in A.holes:
        if hole.active(x):
            g, h = float(hole.lower(x)), float(hole.upper(x))
            if g < h:
                gaps.append((g, h))
    return _subtract_gaps(lo, hi, gaps)


def _extension(c: float, d: float, spacing: float) -> tuple[float, float]:
    eps = EXTENSION_FACTOR * spacing
    return c - eps, d + eps


def _spline_curve(knots, values) -> BoundaryCurve:
    sp = spline_fit_not_a_knot(knots, values)
    return BoundaryCurve("spline", float(knots[0]), float(knots[-1]), spline=sp)


def _poly_curve(nodes, values, lo: float, hi: float) -> BoundaryCurve:
    return BoundaryCurve("polynomial", float(lo), float(hi), poly=poly_fit(nodes, values))


def _outer_splines(S: SampleSet) -> tuple[BoundaryCurve, BoundaryCurve]:
    x = S.nodes
    if len(x) < 4:
        raise ReconstructionError("spline reconstruction needs at least 4 nodes")
    ell = _spline_curve(x, [v.lo for v in S.values])
    u = _spline_curve(x, [v.hi for v in S.values])
    return ell, u


def _pairs(S: SampleSet) -> list[tuple[BoundaryChain, BoundaryChain]]:
    chains = extract_boundary_chains(S)
    return [(chains[i], chains[i + 1]) for i in range(0, len(chains), 2)]


def _caps(S: SampleSet, n: int, m: int, lower, upper) -> tuple[tuple[float, float],
                                                                tuple[float, float]]:
    """Coarse PCT estimates one node outside the gap run."""
    x = S.nodes
    left_x = x[n - 1] if n > 0 else x[n]
    right_x = x[m + 1] if m + 1 < len(x) else x[m]
    return ((float(left_x), 0.5 * (lower[0] + upper[0])),
            (float(right_x), 0.5 * (lower[-1] + upper[-1])))


# --- metric polynomial -------------------------------------------------------

def reconstruct_metric_poly(S: SampleSet) -> Approximant:
    x = S.nodes
    a, b = S.partition.a, S.partition.b
    chains = {c.tag: c for c in labeled_chains(S) if c.label != "unclassified"}
    ell = _poly_curve(x, chains["lower"].values, a, b)
    u = _poly_curve(x, chains["upper"].values, a, b)
    holes = []
    for run in find_gap_runs(S):
        left, right = _caps(S, run.n, run.m, run.lower, run.upper)
        c, d = left[0], right[0]
        lo_chain = chains[f"hole_lower({run.hole})"].values
        up_chain = chains[f"hole_upper({run.hole})"].values
        spacing = S.partition.norm
        holes.append(ApproxHole(c, d, _poly_curve(x, lo_chain, c, d), _poly_curve(x, up_chain, c, d),
                                left, right, *_extension(c, d, spacing)))
    return Approximant(a, b, ell, u, tuple(holes), "metric-poly", {"N": len(x) - 1})


# --- C4 boundaries -----------------------------------------------------------

def _refine_pct_c4(lower: BoundaryChain, upper: BoundaryChain, delta: float,
                   side: str) -> tuple[float, float, bool]:
    if len(lower.values) < 4:
        raise ReconstructionError("PCT refinement needs at least 4 boundary values")
    sl = slice(0, 4) if side == "left" else slice(-4, None)
    xs = np.asarray(lower.nodes[sl])
    g = poly_fit(xs, lower.values[sl])
    h = poly_fit(xs, upper.values[sl])
    psi = lambda t: h(t) - g(t)
    if side == "left":
        edge, gv, hv = lower.nodes[0], lower.values[0], upper.values[0]
        lo, hi = edge - delta, edge
    elif side == "right":
        edge, gv, hv = lower.nodes[-1], lower.values[-1], upper.values[-1]
        lo, hi = edge, edge + delta
    else:
        raise ValueError("side must be 'left' or 'right'")
    try:
        root = bracketed_root(psi, lo, hi)
    except NoRootInBracket:
        far = lo if side == "left" else hi
        return float(far), 0.5 * (gv + hv), True
    return float(root), 0.5 * (g(root) + h(root)), False


def refine_pct_c4(lower: BoundaryChain, upper: BoundaryChain, delta: float,
                  side: str) -> tuple[float, float]:
    """PCT from the intersection of cubics through the four values nearest ``side``.

    Without a sign change of h - g in the one-spacing bracket outside the gap
    run, the coarse cap (one spacing out, gap midpoint height) is returned.
    """
    x, y, _ = _refine_pct_c4(lower, upper, delta, side)
    return x, y


def _local_spacing(S: SampleSet, n: int, m: int) -> tuple[float, float]:
    x = S.nodes
    left = x[n] - x[n - 1] if n > 0 else x[1] - x[0]
    right = x[m + 1] - x[m] if m + 1 < len(x) else x[-1] - x[-2]
    return float(left), float(right)


def _fallback_hole(S: SampleSet, lower: BoundaryChain, upper: BoundaryChain,
                   flag: str) -> ApproxHole:
    left, right = _caps(S, lower.n, lower.m, lower.values, upper.values)
    xs = [left[0], *lower.nodes, right[0]]
    c, d = left[0], right[0]
    lo_curve = _poly_curve(xs, [left[1], *lower.values, right[1]], c, d)
    up_curve = _poly_curve(xs, [left[1], *upper.values, right[1]], c, d)
    dl, dr = _local_spacing(S, lower.n, lower.m)
    return ApproxHole(c, d, lo_curve, up_curve, left, right,
                      c - EXTENSION_FACTOR * dl, d + EXTENSION_FACTOR * dr, (flag,))


def reconstruct_c4(S: SampleSet) -> Approximant:
    a, b = S.partition.a, S.partition.b
    ell, u = _outer_splines(S)
    holes = []
    for lower, upper in _pairs(S):
        if len(lower.values) < 4:
            holes.append(_fallback_hole(S, lower, upper, "fallback:few_nodes"))
            continue
        dl, dr = _local_spacing(S, lower.n, lower.m)
        cx, cy, fl = _refine_pct_c4(lower, upper, dl, "left")
        dx, dy, fr = _refine_pct_c4(lower, upper, dr, "right")
        knots = [cx, *lower.nodes, dx]
        lo_curve = _spline_curve(knots, [cy, *lower.values, dy])
        up_curve = _spline_curve(knots, [cy, *upper.values, dy])
        flags = tuple(f for f, on in (("fallback:left_pct", fl), ("fallback:right_pct", fr)) if on)
        holes.append(ApproxHole(cx, dx, lo_curve, up_curve, (cx, cy), (dx, dy),
                                cx - EXTENSION_FACTOR * dl, dx + EXTENSION_FACTOR * dr, flags))
    return Approximant(a, b, ell, u, tuple(holes), "c4",
                       {"N": len(S) - 1, "delta": S.partition.norm})


# --- Hoelder boundaries ------------------------------------------------------

def approx_pct_holder(lower: BoundaryChain, upper: BoundaryChain, k: int,
                      side: str) -> tuple[float, float]:
    """PCT of a hole with square-root ends, from the reflected graph.

    The 2k points (g(x_i), x_i) and (h(x_i), x_i) nearest ``side`` are
    interpolated by a polynomial in y; its minimum (left) or maximum (right)
    over the y-range of the innermost stencil column gives the PCT.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if len(lower.values) < k:
        raise ReconstructionError(f"hole {lower.hole}: {len(lower.values)} gap nodes, need {k}")
    if side == "left":
        sl, inner, kind = slice(0, k), k - 1, "min"
    elif side == "right":
        sl, inner, kind = slice(len(lower.values) - k, None), len(lower.values) - k, "max"
    else:
        raise ValueError("side must be 'left' or 'right'")
    xs = np.asarray(lower.nodes[sl])
    g = np.asarray(lower.values[sl])
    h = np.asarray(upper.values[sl])
    # moving into the hole the gap must widen: g falls and h rises
    sgn = 1.0 if side == "left" else -1.0
    if k > 1 and (np.any(sgn * np.diff(g) >= 0) or np.any(sgn * np.diff(h) <= 0)):
        raise ReconstructionError(f"hole {lower.hole}: boundary values not monotone near the "
                                  f"{side} PCT")
    if np.any(g >= h):
        raise ReconstructionError(f"hole {lower.hole}: closed gap on the {side} stencil")
    p = poly_fit(np.concatenate([g, h]), np.concatenate([xs, xs]))
    y, x = poly_extremum_on_interval(p, float(lower.values[inner]), float(upper.values[inner]),
                                     kind)
    return x, y


def holder_boundary(nodes: Sequence[float], values: Sequence[float],
                    pct_left: tuple[float, float], pct_right: tuple[float, float],
                    r: int) -> BoundaryCurve:
    """S + P + Q through the PCTs and the boundary values strictly between them.

    P and Q are half-power expansions about the two PCTs fitted to the PCT and
    the r nearest values; S is the not-a-knot spline of what remains.
    """
    px, py = pct_left
    qx, qy = pct_right
    xs = np.asarray(nodes, dtype=float)
    ys = np.asarray(values, dtype=float)
    keep = (xs > px) & (xs < qx)
    xs, ys = xs[keep], ys[keep]
    if len(xs) < max(r, 2):
        raise ReconstructionError(f"{len(xs)} boundary values between the PCTs, need {max(r, 2)}")
    P = singular_fit(px, "right", [(px, py), *zip(xs[:r], ys[:r])], r)
    Q = singular_fit(qx, "left", [(qx, qy), *zip(xs[::-1][:r], ys[::-1][:r])], r)
    knots = np.concatenate([[px], xs, [qx]])
    data = np.concatenate([[py], ys, [qy]]) - P(knots) - Q(knots)
    S = spline_fit_not_a_knot(knots, data)
    return BoundaryCurve("spline_plus_singular", float(px), float(qx), spline=S, singular=(P, Q))


def reconstruct_holder(S: SampleSet, k: int = DEFAULT_K, r: int = DEFAULT_R) -> Approximant:
    a, b = S.partition.a, S.partition.b
    ell, u = _outer_splines(S)
    holes = []
    for lower, upper in _pairs(S):
        span = lower.m - lower.n
        if span <= 2 * k:
            raise ReconstructionError(
                f"hole {lower.hole}: nodes {lower.n}..{lower.m} give m - n = {span}, "
                f"need m - n > 2k = {2 * k}")
        p = approx_pct_holder(lower, upper, k, "left")
        q = approx_pct_holder(lower, upper, k, "right")
        try:
            lo_curve = holder_boundary(lower.nodes, lower.values, p, q, r)
            up_curve = holder_boundary(upper.nodes, upper.values, p, q, r)
        except ValueError as exc:
            raise ReconstructionError(f"hole {lower.hole}: {exc}") from exc
        dl, dr = _local_spacing(S, lower.n, lower.m)
        holes.append(ApproxHole(p[0], q[0], lo_curve, up_curve, p, q,
                                p[0] - EXTENSION_FACTOR * dl, q[0] + EXTENSION_FACTOR * dr))
    return Approximant(a, b, ell, u, tuple(holes), "holder",
                       {"N": len(S) - 1, "delta": S.partition.norm, "k": k, "r": r, "s": 3})


def reconstruct(S: SampleSet, method: str, k: int = DEFAULT_K, r: int = DEFAULT_R) -> Approximant:
    if method == "metric-poly":
        return reconstruct_metric_poly(S)
    if method == "c4":
        return reconstruct_c4(S)
    if method == "holder":
        return reconstruct_holder(S, k, r)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


# --- JSON export -------------------------------------------------------------

def _curve_to_dict(cv: BoundaryCurve) -> dict:
    doc = {"kind": cv.kind, "lo": cv.lo, "hi": cv.hi}
    if cv.poly is not None:
        doc["poly"] = {"nodes": cv.poly.nodes.tolist(), "values": cv.poly.values.tolist()}
    if cv.spline is not None:
        doc["spline"] = {"knots": cv.spline.knots.tolist(), "coeffs": cv.spline.coeffs.tolist()}
    if cv.singular:
        doc["singular"] = [{"origin": e.origin, "side": e.side, "coeffs": e.coeffs.tolist()}
                           for e in cv.singular]
    return doc


def _curve_from_dict(doc: dict) -> BoundaryCurve:
    poly = spline = None
    if "poly" in doc:
        poly = poly_fit(doc["poly"]["nodes"], doc["poly"]["values"])
    if "spline" in doc:
        spline = CubicSpline(np.asarray(doc["spline"]["knots"], dtype=float),
                             np.asarray(doc["spline"]["coeffs"], dtype=float).reshape(-1, 4))
    singular = tuple(SingularExpansion(float(e["origin"]), e["side"],
                                       np.asarray(e["coeffs"], dtype=float))
                     for e in doc.get("singular", []))
    return BoundaryCurve(doc["kind"], float(doc["lo"]), float(doc["hi"]), poly, spline, singular)


def approximant_to_dict(A: Approximant) -> dict:
    return {
        "method": A.method,
        "params": A.params,
        "a": A.a,
        "b": A.b,
        "ell": _curve_to_dict(A.ell),
        "u": _curve_to_dict(A.u),
        "holes": [{
            "c": hl.c, "d": hl.d,
            "ext": [hl.ext_lo, hl.ext_hi],
            "pct_left": list(hl.pct_left), "pct_right": list(hl.pct_right),
            "flags": list(hl.flags),
            "lower": _curve_to_dict(hl.lower), "upper": _curve_to_dict(hl.upper),
        } for hl in A.holes],
    }


def approximant_from_dict(doc: dict) -> Approximant:
    try:
        holes = tuple(ApproxHole(float(h["c"]), float(h["d"]), _curve_from_dict(h["lower"]),
                                 _curve_from_dict(h["upper"]), tuple(h["pct_left"]),
                                 tuple(h["pct_right"]), float(h["ext"][0]), float(h["ext"][1]),
                                 tuple(h.get("flags", ())))
                      for h in doc["holes"])
        return Approximant(float(doc["a"]), float(doc["b"]), _curve_from_dict(doc["ell"]),
                           _curve_from_dict(doc["u"]), holes, doc["method"],
                           dict(doc.get("params", {})))
    except (KeyError, TypeError, IndexError) as exc:
        raise SampleFileError(f"malformed approximant document: {exc!r}") from exc


def write_approximant(path, A: Approximant) -> None:
    atomic_write_json(path, approximant_to_dict(A))


def read_approximant(path) -> Approximant:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SampleFileError(f"{path}: not JSON ({exc})") from exc
    return approximant_from_dict(doc)
