"""Discrete azimuth-elevation domain and the field/mask containers.

Memory layout is row-major with row 0 at the horizon (elevation 0) and row
``height - 1`` at the zenith. Azimuth column ``j`` sits at ``j * h_phi``;
there is no duplicated column at 2*pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

Direction = Literal["up", "down", "left", "right"]
DIRECTIONS: tuple[Direction, ...] = ("up", "down", "left", "right")


class GridMismatchError(ValueError):
    """Two objects that must share a grid do not."""


@dataclass(frozen=True)
class AngularGrid:
    """Regular grid over azimuth [0, 2pi) x elevation [0, pi/2].

    ``width`` columns split the azimuth period, ``height`` rows sample the
    elevation range with both end points included.
    """

    width: int
    height: int

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise TypeError("grid dimensions must be integers")
        if self.width < 2 or self.width % 2:
            raise ValueError(f"width must be even and >= 2, got {self.width}")
        if self.height < 2:
            raise ValueError(f"height must be >= 2, got {self.height}")

    @property
    def h_phi(self) -> float:
        return 2.0 * math.pi / self.width

    @property
    def h_theta(self) -> float:
        return 0.5 * math.pi / (self.height - 1)

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def azimuths(self) -> np.ndarray:
        return np.arange(self.width) * self.h_phi

    def elevations(self) -> np.ndarray:
        return np.arange(self.height) * self.h_theta

    def check_same(self, other: "AngularGrid") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


class PixelIndex(NamedTuple):
    row: int
    col: int

    def flat(self, grid: AngularGrid) -> int:
        return self.row * grid.width + self.col


def pixel_from_flat(grid: AngularGrid, k: int) -> PixelIndex:
    return PixelIndex(*divmod(int(k), grid.width))


def neighbor(grid: AngularGrid, p: PixelIndex, direction: Direction) -> PixelIndex:
    """Cell that supplies the stencil value next to ``p`` in ``direction``.

    Columns wrap periodically. Below the horizon row the ghost is the cell
    itself (zero normal derivative). Above the zenith row the ghost is the
    zenith cell on the opposite azimuth, half a period away.
    """
    i, j = p
    if not (0 <= i < grid.height and 0 <= j < grid.width):
        raise IndexError(f"{p} outside {grid.height}x{grid.width} grid")
    if direction == "left":
        return PixelIndex(i, (j - 1) % grid.width)
    if direction == "right":
        return PixelIndex(i, (j + 1) % grid.width)
    if direction == "down":
        return PixelIndex(i - 1, j) if i > 0 else PixelIndex(i, j)
    if direction == "up":
        if i < grid.height - 1:
            return PixelIndex(i + 1, j)
        return PixelIndex(i, (j + grid.width // 2) % grid.width)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True, eq=False)
class SignalField:
    """Signal levels in dBm, one per pixel, flattened row-major."""

    grid: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def full(cls, grid: AngularGrid, value: float) -> "SignalField":
        return cls(grid, np.full(grid.size, value, dtype=np.float64))

    def as_image(self) -> np.ndarray:
        """Read-only (height, width) view in memory orientation."""
        return self.values.reshape(self.grid.shape)

    def __getitem__(self, p: PixelIndex) -> float:
        return float(self.values[p[0] * self.grid.width + p[1]])


@dataclass(frozen=True, eq=False)
class InpaintingMask:
    """Binary confidence: True where the signal level is known."""

    grid: AngularGrid
    known: np.ndarray

    def __post_init__(self):
        known = np.array(self.known, dtype=bool).reshape(-1)
        if known.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} flags, got {known.size}")
        known.setflags(write=False)
        object.__setattr__(self, "known", known)

    @classmethod
    def empty(cls, grid: AngularGrid) -> "InpaintingMask":
        return cls(grid, np.zeros(grid.size, dtype=bool))

    @property
    def count_known(self) -> int:
        return int(np.count_nonzero(self.known))

    @property
    def known_fraction(self) -> float:
        return self.count_known / self.grid.size

    def as_image(self) -> np.ndarray:
        return self.known.reshape(self.grid.shape)
