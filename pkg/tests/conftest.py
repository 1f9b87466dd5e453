import logging

import numpy as np
import pytest

from svfinterp.sets import CompactSet


@pytest.fixture(autouse=True)
def _quiet_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="svfinterp")


def random_set(rng: np.random.Generator, max_intervals: int = 5, span: float = 5.0) -> CompactSet:
    """A random union of 1..max_intervals disjoint intervals inside [0, span]."""
    k = int(rng.integers(1, max_intervals + 1))
    cuts = np.sort(rng.uniform(0.0, span, 2 * k))
    return CompactSet(zip(cuts[0::2], cuts[1::2]))


def brute_hausdorff(A: CompactSet, B: CompactSet, step: float = 1e-4) -> float:
    """Directed distances maximised over a dense grid of each set."""
    def grid(S):
        return np.concatenate([np.arange(lo, hi, step).tolist() + [hi] for lo, hi in S])

    def dist(points, S):
        d = np.full(points.shape, np.inf)
        for lo, hi in S:
            d = np.minimum(d, np.maximum(0.0, np.maximum(lo - points, points - hi)))
        return d

    return max(dist(grid(A), B).max(), dist(grid(B), A).max())


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def acceptance_line(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
