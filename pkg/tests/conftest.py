import os

# must happen before numba is imported so worker counts up to 8 are honoured
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from skyinpaint.grid import AngularGrid, InpaintingMask, SignalField  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number:2d}: {title}" + (f" -- {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240117)


def random_instance(rng, max_n=2000, known_range=(0.01, 0.5), width=None, height=None):
    """Random (grid, mask, field) with at least one known pixel."""
    while True:
        w = width or 2 * int(rng.integers(1, 26))
        h = height or int(rng.integers(2, 41))
        if w * h <= max_n:
            break
    grid = AngularGrid(w, h)
    frac = rng.uniform(*known_range)
    known = rng.random(grid.size) < frac
    if not known.any():
        known[rng.integers(grid.size)] = True
    values = np.where(known, rng.uniform(-120.0, -60.0, grid.size), 0.0)
    return grid, InpaintingMask(grid, known), SignalField(grid, values)
