import itertools
import math

import numpy as np
import pytest

from svfinterp.bench import max_hausdorff_error
from svfinterp.chains import BoundaryChain, extract_boundary_chains, find_gap_runs
from svfinterp.errors import DomainError, ReconstructionError, SampleFileError
from svfinterp.kernels import poly_fit
from svfinterp.reconstruct import (ApproxHole, Approximant, BoundaryCurve, approx_pct_holder,
                                   approximant_from_dict, approximant_to_dict,
                                   evaluate_approximant, holder_boundary, read_approximant,
                                   reconstruct, reconstruct_c4, reconstruct_holder,
                                   reconstruct_metric_poly, refine_pct_c4, write_approximant)
from svfinterp.sets import CompactSet, hausdorff
from svfinterp.svf_model import (BoundaryFn, HoleSpec, Partition, SampleSet, SvfModel, builtin,
                                 chebyshev_partition, evaluate, fb_hole_end, sample, sample_model,
                                 uniform_partition)


def node_error(S, A):
    return max(hausdorff(v, evaluate_approximant(A, x)) for x, v in zip(S.nodes, S.values))


def chain(nodes, values, side="lower", hole=1):
    return BoundaryChain(hole, side, 0, len(nodes) - 1, tuple(nodes), tuple(values))


def cubic_band():
    ell = BoundaryFn(lambda x: x ** 3 - 2.0, -1, 1)
    u = BoundaryFn(lambda x: 2.0 - x ** 2 + 0.3 * x ** 3, -1, 1)
    return SvfModel(-1.0, 1.0, ell, u, (), "band")


def fb_like(shift=0.0, copies=1):
    """FB's hole, optionally repeated with period 2 on a longer domain."""
    xa = fb_hole_end()
    holes = []
    for j in range(copies):
        s = shift + 2.0 * j
        holes.append(HoleSpec(s - xa, s + xa,
                              BoundaryFn(lambda x, s=s: -math.cos(3 * (x - s)) / 3, s - xa, s + xa),
                              BoundaryFn(lambda x, s=s: math.cos(2 * (x - s)) / 2, s - xa, s + xa)))
    a, b = shift - 1.0, shift - 1.0 + 2.0 * copies
    flat = lambda v: BoundaryFn(lambda x: v, a, b)
    return SvfModel(a, b, flat(-2.0), flat(2.0), tuple(holes), "fb-like")


# --- node interpolation -------------------------------------------------------

@pytest.mark.parametrize("N", [10, 20, 30])
def test_metric_poly_node_exact(N):
    S = sample_model("FA", "chebyshev", N)
    assert node_error(S, reconstruct_metric_poly(S)) <= 1e-9


@pytest.mark.parametrize("N", [10, 18, 31])
def test_c4_node_exact(N):
    S = sample_model("FB", "uniform", N)
    assert node_error(S, reconstruct_c4(S)) <= 1e-9


@pytest.mark.parametrize("N", [20, 30, 41])
def test_holder_node_exact(N):
    S = sample_model("FC", "uniform", N)
    A = reconstruct_holder(S)
    (hole,) = A.holes
    for x, v in zip(S.nodes, S.values):
        # nodes between a node-free PCT estimate and the true PCT are not data
        if hole.ext_lo <= x < hole.c or hole.d < x <= hole.ext_hi:
            continue
        assert hausdorff(v, evaluate_approximant(A, x)) <= 1e-9


# --- metric polynomial ------------------------------------------------------

def test_metric_poly_no_hole_is_plain_interpolation():
    F = cubic_band()
    S = sample(F, chebyshev_partition(12, -1, 1))
    A = reconstruct_metric_poly(S)
    assert A.holes == ()
    xs = np.linspace(-1, 1, 57)
    lo = poly_fit(S.nodes, [v.lo for v in S.values])
    hi = poly_fit(S.nodes, [v.hi for v in S.values])
    for x in xs:
        assert evaluate_approximant(A, x) == CompactSet([(lo(x), hi(x))])


def _brute_chains(layers):
    def pi(V, W):
        return {(v, w) for v, w in itertools.product(V, W)
                if abs(v - w) == min(abs(v - t) for t in W) or abs(v - w) == min(abs(w - t) for t in V)}
    return {c for c in itertools.product(*layers)
            if all((c[i], c[i + 1]) in pi(layers[i], layers[i + 1]) for i in range(len(c) - 1))}


def test_metric_poly_single_hole_by_hand():
    X = Partition(np.array([0.0, 1.0, 2.0, 3.0, 4.0]), "general", 0.0, 4.0)
    vals = [[(0, 4)], [(0, 4)], [(0, 1.5), (2.5, 4)], [(0, 4)], [(0, 4)]]
    S = SampleSet(X, tuple(CompactSet(v) for v in vals))
    # T_i by hand: the gap midpoint 2 is an APCT at nodes 1, 3 and is carried to 0, 4
    layers = [[0, 2, 4], [0, 2, 4], [0, 1.5, 2.5, 4], [0, 2, 4], [0, 2, 4]]
    brute = _brute_chains(layers)
    assert brute == {(0,) * 5, (4,) * 5, (2, 2, 1.5, 2, 2), (2, 2, 2.5, 2, 2)}
    A = reconstruct_metric_poly(S)
    (hole,) = A.holes
    assert (hole.c, hole.d) == (1.0, 3.0)
    assert hole.pct_left == (1.0, 2.0) and hole.pct_right == (3.0, 2.0)
    xs = np.linspace(1, 3, 21)
    coef_lo = np.polyfit(X.nodes, [2, 2, 1.5, 2, 2], 4)
    coef_hi = np.polyfit(X.nodes, [2, 2, 2.5, 2, 2], 4)
    assert np.allclose(hole.lower(xs), np.polyval(coef_lo, xs), atol=1e-12)
    assert np.allclose(hole.upper(xs), np.polyval(coef_hi, xs), atol=1e-12)


def test_metric_poly_caps_are_gap_midpoints():
    S = sample_model("FA", "chebyshev", 30)
    A = reconstruct_metric_poly(S)
    for run, hole in zip(find_gap_runs(S), A.holes):
        assert hole.pct_left[1] == (run.lower[0] + run.upper[0]) / 2
        assert hole.pct_right[1] == (run.lower[-1] + run.upper[-1]) / 2
        assert hole.c == S.nodes[run.n - 1] and hole.d == S.nodes[run.m + 1]


# --- C4 ---------------------------------------------------------------------

def test_refine_pct_cubic_exact():
    xs = [0.05, 0.15, 0.25, 0.35]
    lo = chain(xs, [x * x for x in xs])
    up = chain(xs, xs, "upper")
    c, y = refine_pct_c4(lo, up, 0.1, "left")
    assert abs(c) <= 1e-10 and abs(y) <= 1e-10


def test_refine_pct_linear_wedge():
    c0 = 0.03
    xs = [0.05, 0.15, 0.25, 0.35]
    lo = chain(xs, [-(x - c0) for x in xs])
    up = chain(xs, [x - c0 for x in xs], "upper")
    c, y = refine_pct_c4(lo, up, 0.1, "left")
    assert c == pytest.approx(c0, abs=1e-12) and y == pytest.approx(0.0, abs=1e-12)
    # mirrored on the right
    xr = [-x for x in reversed(xs)]
    lo = chain(xr, [-(-x - c0) for x in xr])
    up = chain(xr, [-x - c0 for x in xr], "upper")
    d, _ = refine_pct_c4(lo, up, 0.1, "right")
    assert d == pytest.approx(-c0, abs=1e-12)


def test_refine_pct_fallback():
    xs = [0.1, 0.2, 0.3, 0.4]
    lo = chain(xs, [-1 - x for x in xs])
    up = chain(xs, [1 + x for x in xs], "upper")
    assert refine_pct_c4(lo, up, 0.1, "left") == (pytest.approx(0.0), 0.0)


def test_refined_pct_stays_in_bracket():
    rng = np.random.default_rng(12)
    for _ in range(200):
        c0 = rng.uniform(-0.1, 0.0)
        slope_g, slope_h = rng.uniform(-3, -0.1), rng.uniform(0.1, 3)
        curv = rng.normal(size=2)
        xs = np.arange(4) * 0.1
        g = slope_g * (xs - c0) + curv[0] * (xs - c0) ** 2
        h = slope_h * (xs - c0) + curv[1] * (xs - c0) ** 2
        if np.any(g >= h):
            continue
        c, _ = refine_pct_c4(chain(xs, g), chain(xs, h, "upper"), 0.1, "left")
        assert -0.1 <= c <= 0.0


def test_c4_reproduces_cubic_band():
    F = cubic_band()
    A = reconstruct_c4(sample(F, uniform_partition(9, -1, 1)))
    assert max_hausdorff_error(F, A, 300) <= 1e-10


def test_c4_two_copies_match_one():
    one = reconstruct_c4(sample(fb_like(), uniform_partition(20, -1, 1)))
    two = reconstruct_c4(sample(fb_like(copies=2), uniform_partition(40, -1, 3)))
    assert len(two.holes) == 2
    xs = np.linspace(-0.7, 0.7, 71)
    for j, hole in enumerate(two.holes):
        ref = one.holes[0]
        assert hole.c - 2 * j == pytest.approx(ref.c, abs=1e-9)
        assert hole.d - 2 * j == pytest.approx(ref.d, abs=1e-9)
        assert np.allclose(hole.lower(xs + 2 * j), ref.lower(xs), atol=1e-9)
        assert np.allclose(hole.upper(xs + 2 * j), ref.upper(xs), atol=1e-9)


def test_c4_short_hole_falls_back():
    S = sample(fb_like(), uniform_partition(4, -1, 1))
    A = reconstruct_c4(S)
    assert A.holes[0].flags == ("fallback:few_nodes",)
    assert node_error(S, A) <= 1e-9


def test_fb_c4_error_scales_like_delta4():
    ratios = []
    for N in (18, 36):
        S = sample_model("FB", "uniform", N)
        err = max_hausdorff_error(builtin("FB"), reconstruct_c4(S), 400)
        ratios.append(err / S.partition.norm ** 4)
    assert max(ratios) <= 10


# --- Hoelder ----------------------------------------------------------------

def test_parabolic_cap_pct():
    c0, y0, alpha = 0.02, 0.3, 1.7
    xs = np.array([0.05, 0.15])
    half = np.sqrt((xs - c0) / alpha)
    p = approx_pct_holder(chain(xs, y0 - half), chain(xs, y0 + half, "upper"), 2, "left")
    assert p[0] == pytest.approx(c0, abs=1e-10) and p[1] == pytest.approx(y0, abs=1e-10)
    xr = -xs[::-1]
    half = np.sqrt((-xr - c0) / alpha)
    q = approx_pct_holder(chain(xr, y0 - half), chain(xr, y0 + half, "upper"), 2, "right")
    assert q[0] == pytest.approx(-c0, abs=1e-10) and q[1] == pytest.approx(y0, abs=1e-10)


def test_symmetric_data_gives_axis_height():
    S = sample_model("FC", "uniform", 30)
    lo, up = extract_boundary_chains(S)
    for k in (2, 3, 4):
        assert abs(approx_pct_holder(lo, up, k, "left")[1]) <= 1e-12


def test_non_monotone_stencil_rejected():
    xs = [0.1, 0.2, 0.3]
    with pytest.raises(ReconstructionError):
        approx_pct_holder(chain(xs, [-1, -0.5, -2]), chain(xs, [1, 2, 3], "upper"), 3, "left")


@pytest.mark.parametrize("N", [20, 29, 40, 57])
@pytest.mark.parametrize("k", [2, 3])
def test_holder_pct_geometry(N, k):
    S = sample_model("FC", "uniform", N)
    lo, up = extract_boundary_chains(S)
    delta = S.partition.norm
    px, py = approx_pct_holder(lo, up, k, "left")
    assert lo.nodes[0] - 2 * delta <= px <= lo.nodes[0] + delta
    assert lo.values[k - 1] <= py <= up.values[k - 1]


def test_holder_boundary_exact_for_quadratics():
    # with P and Q able to represent the data, the spline sees a quadratic
    f = lambda x: 1.0 - x * x + 0.4 * x
    nodes = np.linspace(-0.9, 0.9, 13)
    p = (-1.0, f(-1.0))
    q = (1.0, f(1.0))
    cv = holder_boundary(nodes, f(nodes), p, q, 4)
    xs = np.linspace(-1, 1, 101)
    assert np.abs(cv(xs) - f(xs)).max() <= 1e-8


def test_holder_requires_wide_holes():
    S = sample_model("FC", "uniform", 10)
    with pytest.raises(ReconstructionError, match="m - n"):
        reconstruct_holder(S, k=3)


def test_holder_without_holes_matches_c4():
    S = sample(cubic_band(), uniform_partition(12, -1, 1))
    A, B = reconstruct_holder(S), reconstruct_c4(S)
    xs = np.linspace(-1, 1, 33)
    assert np.array_equal(A.ell(xs), B.ell(xs)) and np.array_equal(A.u(xs), B.u(xs))


def test_fc_holder_at_centre():
    S = sample_model("FC", "uniform", 40)
    got = evaluate_approximant(reconstruct_holder(S), 0.0)
    assert len(got) == 2
    assert hausdorff(got, evaluate(builtin("FC"), 0.0)) <= 1e-3


# --- evaluation ---------------------------------------------------------------

def _const(v, lo=-1.0, hi=1.0):
    return BoundaryCurve("polynomial", lo, hi, poly=poly_fit([lo, hi], [v, v]))


def _line(y0, y1, lo, hi):
    return BoundaryCurve("polynomial", lo, hi, poly=poly_fit([lo, hi], [y0, y1]))


def test_evaluate_outside_holes_and_domain():
    hole = ApproxHole(-0.2, 0.2, _const(-0.5, -0.2, 0.2), _const(0.5, -0.2, 0.2), (-0.2, 0), (0.2, 0),
                      -0.3, 0.3)
    A = Approximant(-1, 1, _const(-1), _const(1), (hole,), "test")
    assert evaluate_approximant(A, 0.8) == CompactSet([(-1, 1)])
    assert evaluate_approximant(A, 0.0) == CompactSet([(-1, -0.5), (0.5, 1)])
    with pytest.raises(DomainError):
        evaluate_approximant(A, 1.5)


def test_crossing_curves_collapse_the_gap():
    # lower rises through upper at x = 0
    hole = ApproxHole(-0.5, 0.5, _line(-0.5, 0.5, -0.5, 0.5), _line(0.5, -0.5, -0.5, 0.5),
                      (-0.5, 0), (0.5, 0), -0.6, 0.6)
    A = Approximant(-1, 1, _const(-1), _const(1), (hole,), "test")
    assert len(evaluate_approximant(A, -0.25)) == 2
    assert evaluate_approximant(A, 0.25) == CompactSet([(-1, 1)])


def test_curves_are_constant_outside_their_interval():
    cv = _line(0.0, 1.0, 0.0, 1.0)
    assert cv(-5.0) == 0.0 and cv(7.0) == 1.0


# --- refinement and export ------------------------------------------------------

@pytest.mark.parametrize("model,method,kind,Ns", [
    ("FA", "metric-poly", "chebyshev", (10, 20, 40, 80)),
    ("FB", "c4", "uniform", (10, 20, 40, 80)),
    ("FC", "holder", "uniform", (20, 40, 80)),
])
def test_monotone_refinement(model, method, kind, Ns):
    F = builtin(model)
    errs = [max_hausdorff_error(F, reconstruct(sample_model(model, kind, N), method), 400)
            for N in Ns]
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 <= 2 * e0


@pytest.mark.parametrize("model,method,kind,N", [
    ("FA", "metric-poly", "chebyshev", 30),
    ("FB", "c4", "uniform", 18),
    ("FB", "c4", "uniform", 4),
    ("FC", "holder", "uniform", 40),
])
def test_json_round_trip(tmp_path, model, method, kind, N):
    A = reconstruct(sample_model(model, kind, N), method)
    path = tmp_path / "a.json"
    write_approximant(path, A)
    B = read_approximant(path)
    assert approximant_to_dict(B) == approximant_to_dict(A)
    for x in np.linspace(A.a, A.b, 100):
        assert hausdorff(evaluate_approximant(A, x), evaluate_approximant(B, x)) <= 1e-12


def test_malformed_approximant():
    doc = approximant_to_dict(reconstruct(sample_model("FC", "uniform", 30), "holder"))
    del doc["holes"][0]["upper"]
    with pytest.raises(SampleFileError):
        approximant_from_dict(doc)


def test_unknown_method():
    with pytest.raises(ValueError):
        reconstruct(sample_model("FC", "uniform", 30), "spline")
