"""Error measurement and convergence sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._io import atomic_write_text
from .errors import SvfError
from .reconstruct import DEFAULT_K, DEFAULT_R, Approximant, evaluate_approximant, reconstruct
from .sets import hausdorff
from .svf_model import SvfModel, builtin, evaluate, make_partition, sample

log = logging.getLogger(__name__)

CSV_HEADER = ["method", "model", "N", "delta", "max_error", "ratio",
              "pct_error_left", "pct_error_right", "slope"]
# the two smallest N are treated as pre-asymptotic
SLOPE_SKIP = 2
SLOPE_MIN_POINTS = 4


def max_hausdorff_error(F: SvfModel, A: Approximant, grid_count: int) -> float:
    """max over grid_count equidistant points of d_H(F(x), A(x))."""
    if grid_count < 2:
        raise ValueError("grid_count must be at least 2")
    xs = np.linspace(F.a, F.b, grid_count)
    return max(hausdorff(evaluate(F, x), evaluate_approximant(A, x)) for x in xs)


def pct_error(true_pct: Sequence[float], approx_pct: Sequence[float]) -> float:
    return math.hypot(true_pct[0] - approx_pct[0], true_pct[1] - approx_pct[1])


def pct_errors(F: SvfModel, A: Approximant) -> tuple[float, float]:
    """Worst left and worst right PCT error over the reconstructed holes.

    Each reconstructed PCT is compared with the nearest true PCT of the same
    side.
    """
    if not A.holes or not F.holes:
        return math.nan, math.nan
    left = max(min(pct_error(h.pct_left, t.pct_left) for t in F.holes) for h in A.holes)
    right = max(min(pct_error(h.pct_right, t.pct_right) for t in F.holes) for h in A.holes)
    return left, right


def loglog_slope(deltas: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(delta)."""
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if d.size != e.size or d.size < 2:
        raise ValueError("need at least two (delta, error) pairs")
    if np.any(d <= 0) or np.any(e <= 0):
        raise ValueError("log-log slope needs positive deltas and errors")
    slope, _ = np.polyfit(np.log(d), np.log(e), 1)
    return float(slope)


def default_partition(method: str) -> str:
    return "chebyshev" if method == "metric-poly" else "uniform"


def default_grid(method: str, N: int) -> int:
    return 2 * N if method == "metric-poly" else 400


@dataclass
class ErrorRecord:
    N: int
    delta: float
    max_error: float
    ratio: float
    pct_error_left: float
    pct_error_right: float
    error: str | None = None


@dataclass
class ErrorReport:
    method: str
    model: str
    records: list[ErrorRecord] = field(default_factory=list)
    slope: float = math.nan
    pct_slope_left: float = math.nan
    pct_slope_right: float = math.nan

    def ok(self) -> list[ErrorRecord]:
        return [r for r in self.records if r.error is None]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.ok()], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.records:
            w.writerow([self.method, self.model, r.N, repr(r.delta), repr(r.max_error),
                        repr(r.ratio), repr(r.pct_error_left), repr(r.pct_error_right),
                        repr(self.slope)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        atomic_write_text(path, self.to_csv())


def _ratio(method: str, N: int, delta: float, err: float) -> float:
    if method == "metric-poly":
        return err / (math.log(N) / N)
    if method == "c4":
        return err / delta ** 4
    # the Hoelder figures report log(error) / log(delta)
    return math.log(err) / math.log(delta) if err > 0 and delta != 1 else math.nan


def windowed_slope(deltas: Sequence[float], values: Sequence[float]) -> float:
    """Slope over the sweep with the two smallest N dropped (needs 4 points left)."""
    d = np.asarray(deltas, dtype=float)
    v = np.asarray(values, dtype=float)
    good = np.isfinite(v) & (v > 0)
    d, v = d[good], v[good]
    # ascending N means descending delta
    order = np.argsort(-d)
    d, v = d[order][SLOPE_SKIP:], v[order][SLOPE_SKIP:]
    if d.size < SLOPE_MIN_POINTS:
        return math.nan
    return loglog_slope(d, v)


def run_one(F: SvfModel, method: str, N: int, kind: str | None = None,
            grid_count: int | None = None, k: int = DEFAULT_K,
            r: int = DEFAULT_R) -> tuple[ErrorRecord, Approximant]:
    X = make_partition(kind or default_partition(method), N, F.a, F.b)
    A = reconstruct(sample(F, X), method, k, r)
    delta = X.norm
    err = max_hausdorff_error(F, A, grid_count or default_grid(method, N))
    left, right = pct_errors(F, A)
    return ErrorRecord(N, delta, err, _ratio(method, N, delta, err), left, right), A


def sweep(model: str | SvfModel, method: str, N_list: Sequence[int], grid_count: int | None = None,
          kind: str | None = None, k: int = DEFAULT_K, r: int = DEFAULT_R) -> ErrorReport:
    """One record per N; a failing N is recorded with its error and skipped."""
    F = builtin(model) if isinstance(model, str) else model
    if list(N_list) != sorted(N_list):
        raise ValueError("N_list must be ascending")
    report = ErrorReport(method, F.name)
    for N in N_list:
        try:
            rec, _ = run_one(F, method, N, kind, grid_count, k, r)
        except SvfError as exc:
            log.warning("%s/%s N=%d failed: %s", F.name, method, N, exc)
            X = make_partition(kind or default_partition(method), N, F.a, F.b)
            rec = ErrorRecord(N, X.norm, math.nan, math.nan, math.nan, math.nan, str(exc))
        report.records.append(rec)
    ok = report.ok()
    if ok:
        deltas = [rc.delta for rc in ok]
        report.slope = windowed_slope(deltas, [rc.max_error for rc in ok])
        report.pct_slope_left = windowed_slope(deltas, [rc.pct_error_left for rc in ok])
        report.pct_slope_right = windowed_slope(deltas, [rc.pct_error_right for rc in ok])
    return report
