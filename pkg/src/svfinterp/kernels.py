"""Scalar approximation primitives.

Barycentric Lagrange interpolation (second kind) with derivatives, the
Lebesgue function, not-a-knot cubic splines, half-power singular expansions
and bracketed root / extremum search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoRootInBracket

ROOT_TOL = 1e-12
EXTREMUM_SCAN = 1000


def _as_1d(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Weights 1/prod_{k!=j}(x_j - x_k), rescaled so that max |w| = 1."""
    x = np.asarray(nodes, dtype=float)
    if x.size == 1:
        return np.ones(1)
    # capacity scaling keeps the products away from over/underflow
    scale = 4.0 / (x.max() - x.min())
    diff = scale * (x[:, None] - x[None, :])
    np.fill_diagonal(diff, 1.0)
    sign = np.prod(np.sign(diff), axis=1)
    logmag = -np.sum(np.log(np.abs(diff)), axis=1)
    w = sign * np.exp(logmag - logmag.max())
    return w


@dataclass(frozen=True)
class PolyInterpolant:
    """Interpolating polynomial of degree len(nodes) - 1 in barycentric form."""

    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.nodes) - 1

    def __call__(self, x):
        xs, scalar = _as_1d(x)
        out = np.empty_like(xs)
        diff = xs[:, None] - self.nodes[None, :]
        exact = diff == 0.0
        hit = exact.any(axis=1)
        if hit.any():
            out[hit] = self.values[np.argmax(exact[hit], axis=1)]
        miss = ~hit
        if miss.any():
            t = self.weights[None, :] / diff[miss]
            out[miss] = (t @ self.values) / t.sum(axis=1)
        return float(out[0]) if scalar else out

    def derivative(self, x):
        """First derivative of the interpolating polynomial."""
        xs, scalar = _as_1d(x)
        out = np.empty_like(xs)
        w, f, xn = self.weights, self.values, self.nodes
        for k, xv in enumerate(xs):
            d = xv - xn
            at = np.flatnonzero(d == 0.0)
            if at.size:
                i = at[0]
                others = np.arange(len(xn)) != i
                dij = (w[others] / w[i]) / (xn[i] - xn[others])
                out[k] = float(np.dot(dij, f[others] - f[i]))
            else:
                t = w / d
                px = np.dot(t, f) / t.sum()
                out[k] = np.dot(t, (px - f) / d) / t.sum()
        return float(out[0]) if scalar else out


def poly_fit(nodes: Sequence[float], values: Sequence[float]) -> PolyInterpolant:
    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError("nodes and values must be equal-length 1-d sequences")
    if np.unique(x).size != x.size:
        raise ValueError("duplicate interpolation nodes")
    return PolyInterpolant(x.copy(), y.copy(), barycentric_weights(x))


def poly_derivative_eval(p: PolyInterpolant, x: float) -> float:
    return p.derivative(x)


def lebesgue_function(nodes: Sequence[float], grid: Sequence[float]) -> np.ndarray:
    """sum_i |l_i(x)| at every grid point."""
    x = np.asarray(nodes, dtype=float)
    w = barycentric_weights(x)
    g = np.asarray(grid, dtype=float)
    diff = g[:, None] - x[None, :]
    out = np.ones(g.size)
    miss = ~(diff == 0.0).any(axis=1)
    t = w[None, :] / diff[miss]
    out[miss] = np.abs(t).sum(axis=1) / np.abs(t.sum(axis=1))
    return out


def lebesgue_constant(nodes: Sequence[float], grid: Sequence[float]) -> float:
    return float(lebesgue_function(nodes, grid).max())


# --- cubic splines -----------------------------------------------------------

def _solve_tridiagonal(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                       rhs: np.ndarray) -> np.ndarray:
    """Thomas algorithm; ``sub[0]`` and ``sup[-1]`` are ignored."""
    n = diag.size
    c = np.zeros(n)
    d = np.zeros(n)
    c[0] = sup[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - sub[i] * c[i - 1]
        c[i] = sup[i] / m if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m
    out = np.empty(n)
    out[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        out[i] = d[i] - c[i] * out[i + 1]
    return out


@dataclass(frozen=True)
class CubicSpline:
    """Piecewise cubic; on [x_i, x_{i+1}] s = c0 + c1 t + c2 t^2 + c3 t^3, t = x - x_i.

    Outside the knot span the end pieces are extended polynomially.
    """

    knots: np.ndarray
    coeffs: np.ndarray  # shape (len(knots) - 1, 4)

    def _locate(self, xs: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, xs, side="right") - 1
        return np.clip(idx, 0, len(self.knots) - 2)

    def __call__(self, x, nu: int = 0):
        xs, scalar = _as_1d(x)
        i = self._locate(xs)
        t = xs - self.knots[i]
        c0, c1, c2, c3 = self.coeffs[i].T
        if nu == 0:
            out = c0 + t * (c1 + t * (c2 + t * c3))
        elif nu == 1:
            out = c1 + t * (2 * c2 + 3 * t * c3)
        elif nu == 2:
            out = 2 * c2 + 6 * t * c3
        elif nu == 3:
            out = 6 * c3
        else:
            raise ValueError("derivative order must be 0..3")
        return float(out[0]) if scalar else out


def spline_fit_not_a_knot(knots: Sequence[float], values: Sequence[float]) -> CubicSpline:
    """Interpolating cubic spline with third-derivative continuity at the
    second and the penultimate knot."""
    x = np.asarray(knots, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("knots and values must be equal-length 1-d sequences")
    if x.size < 4:
        raise ValueError("not-a-knot spline needs at least 4 knots")
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("knots must be strictly ascending")
    n = x.size
    delta = np.diff(y) / h
    # unknowns: second derivatives M_1..M_{n-2}; M_0 and M_{n-1} are
    # eliminated through the two not-a-knot conditions
    m = n - 2
    sub = np.zeros(m)
    diag = np.zeros(m)
    sup = np.zeros(m)
    rhs = 6.0 * (delta[1:] - delta[:-1])
    for r in range(m):
        i = r + 1
        sub[r] = h[i - 1]
        diag[r] = 2.0 * (h[i - 1] + h[i])
        sup[r] = h[i]
    h0, h1 = h[0], h[1]
    hl, hp = h[-1], h[-2]
    if m == 2:
        a11 = (h0 + h1) * (h0 + 2 * h1) / h1
        a12 = (h1 * h1 - h0 * h0) / h1
        a21 = (hp * hp - hl * hl) / hp
        a22 = (hp + hl) * (2 * hp + hl) / hp
        det = a11 * a22 - a12 * a21
        M1 = (rhs[0] * a22 - a12 * rhs[1]) / det
        M2 = (a11 * rhs[1] - a21 * rhs[0]) / det
        inner = np.array([M1, M2])
    else:
        diag[0] = (h0 + h1) * (h0 + 2 * h1) / h1
        sup[0] = (h1 * h1 - h0 * h0) / h1
        sub[-1] = (hp * hp - hl * hl) / hp
        diag[-1] = (hp + hl) * (2 * hp + hl) / hp
        inner = _solve_tridiagonal(sub, diag, sup, rhs)
    M = np.empty(n)
    M[1:-1] = inner
    M[0] = ((h0 + h1) * M[1] - h0 * M[2]) / h1
    M[-1] = ((hp + hl) * M[-2] - hl * M[-3]) / hp
    coeffs = np.empty((n - 1, 4))
    coeffs[:, 0] = y[:-1]
    coeffs[:, 1] = delta - h * (2 * M[:-1] + M[1:]) / 6.0
    coeffs[:, 2] = M[:-1] / 2.0
    coeffs[:, 3] = (M[1:] - M[:-1]) / (6.0 * h)
    return CubicSpline(x.copy(), coeffs)


# --- half-power expansions ---------------------------------------------------

@dataclass(frozen=True)
class SingularExpansion:
    """sum_j coeffs[j] * |x - origin|^(j/2).

    ``side`` records on which side of ``origin`` the fitted data lie.
    """

    origin: float
    side: str
    coeffs: np.ndarray

    def __call__(self, x):
        xs, scalar = _as_1d(x)
        s = np.sqrt(np.abs(xs - self.origin))
        out = np.zeros_like(s)
        for c in self.coeffs[::-1]:
            out = out * s + c
        return float(out[0]) if scalar else out


def newton_to_monomial(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Monomial coefficients (ascending powers) of the interpolant, via
    divided differences."""
    t = np.asarray(nodes, dtype=float)
    dd = np.asarray(values, dtype=float).copy()
    n = t.size
    for j in range(1, n):
        dd[j:] = (dd[j:] - dd[j - 1:-1]) / (t[j:] - t[:-j])
    coef = np.zeros(n)
    coef[0] = dd[-1]
    # Horner on the Newton form: p <- p * (s - t_k) + dd_k
    for k in range(n - 2, -1, -1):
        shifted = np.zeros(n)
        shifted[1:] = coef[:-1]
        coef = shifted - t[k] * coef
        coef[0] += dd[k]
    return coef


def singular_fit(origin: float, side: str, data: Sequence[tuple[float, float]],
                 r: int) -> SingularExpansion:
    """Fit sum_{j<=r} p_j |x - origin|^(j/2) through r + 1 points.

    The first point must sit at ``origin``; the others lie strictly on
    ``side`` ('left' or 'right') of it. With s = sqrt|x - origin| this is
    ordinary polynomial interpolation in s.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    pts = [(float(x), float(y)) for x, y in data]
    if len(pts) != r + 1:
        raise ValueError(f"singular_fit with r={r} needs {r + 1} points, got {len(pts)}")
    if pts[0][0] != origin:
        raise ValueError("first data point must lie at the expansion origin")
    for x, _ in pts[1:]:
        if (side == "right" and not x > origin) or (side == "left" and not x < origin):
            raise ValueError(f"data abscissa {x} not on the {side} of {origin}")
    s = np.sqrt(np.abs(np.array([p[0] for p in pts]) - origin))
    if np.unique(s).size != s.size:
        raise ValueError("coincident abscissas in singular fit")
    coef = newton_to_monomial(s, np.array([p[1] for p in pts]))
    return SingularExpansion(float(origin), side, coef)


# --- root and extremum search ------------------------------------------------

def bracketed_root(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = ROOT_TOL, max_iter: int = 200) -> float:
    """Bisection for a sign change of ``f`` in [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoRootInBracket(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def poly_extremum_on_interval(p: PolyInterpolant, lo: float, hi: float,
                              kind: str = "min") -> tuple[float, float]:
    """Global minimum or maximum of ``p`` over [lo, hi] as (argument, value)."""
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    if not lo < hi:
        raise ValueError("empty search interval")
    grid = np.linspace(lo, hi, EXTREMUM_SCAN + 1)
    dp = p.derivative(grid)
    cand = [lo, hi]
    for i in range(EXTREMUM_SCAN):
        if dp[i] == 0.0:
            cand.append(grid[i])
        elif dp[i] * dp[i + 1] < 0:
            cand.append(bracketed_root(p.derivative, grid[i], grid[i + 1], tol=1e-15))
    cand_arr = np.array(cand)
    vals = p(cand_arr)
    k = int(np.argmin(vals) if kind == "min" else np.argmax(vals))
    return float(cand_arr[k]), float(vals[k])
