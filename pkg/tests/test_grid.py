import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skyinpaint.grid import (DIRECTIONS, AngularGrid, InpaintingMask, PixelIndex, SignalField,
                             neighbor, pixel_from_flat)

# Boundary table for a 4-column, 5-row grid, transcribed cell by cell:
# ghost row above the zenith row, ghost row below the horizon row,
# ghost columns left of column 0 and right of column 3.
TABLE_ABOVE = [(4, 2), (4, 3), (4, 0), (4, 1)]
TABLE_BELOW = [(0, 0), (0, 1), (0, 2), (0, 3)]
TABLE_LEFT = {i: (i, 3) for i in range(5)}
TABLE_RIGHT = {i: (i, 0) for i in range(5)}


def table_lookup(i, j, direction):
    if direction == "up":
        return TABLE_ABOVE[j] if i == 4 else (i + 1, j)
    if direction == "down":
        return TABLE_BELOW[j] if i == 0 else (i - 1, j)
    if direction == "left":
        return TABLE_LEFT[i] if j == 0 else (i, j - 1)
    return TABLE_RIGHT[i] if j == 3 else (i, j + 1)


def test_neighbor_reproduces_boundary_table():
    grid = AngularGrid(4, 5)
    for i in range(5):
        for j in range(4):
            for d in DIRECTIONS:
                assert neighbor(grid, PixelIndex(i, j), d) == table_lookup(i, j, d), (i, j, d)


@pytest.mark.parametrize("p,direction,expected", [
    ((4, 0), "up", (4, 2)),
    ((0, 1), "down", (0, 1)),
    ((2, 3), "right", (2, 0)),
    ((2, 1), "left", (2, 0)),
])
def test_neighbor_examples(p, direction, expected):
    assert neighbor(AngularGrid(4, 5), PixelIndex(*p), direction) == expected


def test_neighbor_rejects_outside_cell():
    with pytest.raises(IndexError):
        neighbor(AngularGrid(4, 5), PixelIndex(5, 0), "up")


@pytest.mark.parametrize("w,h", [(3, 5), (0, 5), (4, 1), (1, 3)])
def test_invalid_grids(w, h):
    with pytest.raises(ValueError):
        AngularGrid(w, h)


@pytest.mark.parametrize("w,h", [(2, 2), (4, 5), (360, 91), (3600, 901), (1000, 7)])
def test_spacings_cover_domain(w, h):
    grid = AngularGrid(w, h)
    assert abs(grid.h_phi * w - 2 * math.pi) <= 4 * math.ulp(2 * math.pi)
    assert abs(grid.h_theta * (h - 1) - math.pi / 2) <= 4 * math.ulp(math.pi / 2)


def test_flat_index_row_major():
    grid = AngularGrid(6, 3)
    assert PixelIndex(2, 5).flat(grid) == 17
    assert pixel_from_flat(grid, 17) == (2, 5)


grids = st.builds(AngularGrid, st.integers(1, 20).map(lambda k: 2 * k), st.integers(2, 20))


@given(grids, st.data())
def test_neighbors_always_valid_and_boundaries_involutive(grid, data):
    i = data.draw(st.integers(0, grid.height - 1))
    j = data.draw(st.integers(0, grid.width - 1))
    p = PixelIndex(i, j)
    for d in DIRECTIONS:
        q = neighbor(grid, p, d)
        assert 0 <= q.row < grid.height and 0 <= q.col < grid.width
    bottom = PixelIndex(0, j)
    assert neighbor(grid, neighbor(grid, bottom, "down"), "down") == bottom
    top = PixelIndex(grid.height - 1, j)
    assert neighbor(grid, neighbor(grid, top, "up"), "up") == top
    # left and right are inverse to each other everywhere
    assert neighbor(grid, neighbor(grid, p, "left"), "right") == p


def test_containers_validate_length_and_are_read_only():
    grid = AngularGrid(4, 5)
    with pytest.raises(ValueError):
        SignalField(grid, np.zeros(19))
    with pytest.raises(ValueError):
        InpaintingMask(grid, np.zeros(21, bool))
    f = SignalField.full(grid, -95.0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    m = InpaintingMask.empty(grid)
    assert m.count_known == 0 and m.known_fraction == 0.0
    assert f[PixelIndex(4, 3)] == -95.0
