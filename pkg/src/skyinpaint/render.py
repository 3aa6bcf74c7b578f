"""Greyscale rendering and PGM/PNG encoding.

Images put the zenith on the top row and the horizon on the bottom row,
with azimuth increasing to the right. Brighter means a higher level; black
is reserved for missing data.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import BinaryIO, Literal

import numpy as np

from .grid import InpaintingMask, SignalField

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class GreyscaleParams:
    mode: Literal["minmax", "percentile"] = "minmax"
    lo_percentile: float = 1.0
    hi_percentile: float = 99.0

    def __post_init__(self):
        if self.mode not in ("minmax", "percentile"):
            raise ValueError(f"unknown greyscale mode {self.mode!r}")
        if not 0.0 <= self.lo_percentile < self.hi_percentile <= 100.0:
            raise ValueError("need 0 <= lo_percentile < hi_percentile <= 100")


def intensity_range(values: np.ndarray, params: GreyscaleParams) -> tuple[float, float]:
    if params.mode == "percentile":
        lo, hi = np.percentile(values, [params.lo_percentile, params.hi_percentile])
        return float(lo), float(hi)
    return float(values.min()), float(values.max())


def to_greyscale(field: SignalField, mask: InpaintingMask | None = None,
                 params: GreyscaleParams = GreyscaleParams()) -> np.ndarray:
    """Affine map of levels to 0..255 as a (height, width) uint8 image."""
    values = field.values
    considered = np.ones(values.size, bool) if mask is None else mask.known
    if mask is not None:
        field.grid.check_same(mask.grid)
    picked = values[considered]
    if picked.size == 0:
        raise ValueError("no pixels to render")
    if not np.all(np.isfinite(picked)):
        raise ValueError("cannot render non-finite signal levels")
    lo, hi = intensity_range(picked, params)
    out = np.zeros(values.size, dtype=np.uint8)
    if hi > lo:
        scaled = np.clip((picked - lo) / (hi - lo), 0.0, 1.0)
        out[considered] = np.floor(255.0 * scaled + 0.5).astype(np.uint8)
    else:
        out[considered] = 255
    return out.reshape(field.grid.shape)[::-1].copy()


def _check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 2 or image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {image.shape}")
    if image.dtype != np.uint8:
        raise TypeError(f"expected uint8 pixels, got {image.dtype}")
    return np.ascontiguousarray(image)


def write_pgm(image: np.ndarray, sink: BinaryIO) -> int:
    """Binary (P5) PGM with maxval 255. Returns the number of bytes written."""
    image = _check_image(image)
    h, w = image.shape
    data = b"P5\n%d %d\n255\n" % (w, h) + image.tobytes()
    sink.write(data)
    return len(data)


def _chunk(kind: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(payload, zlib.crc32(kind))
    return struct.pack(">I", len(payload)) + kind + payload + struct.pack(">I", crc)


def write_png(image: np.ndarray, sink: BinaryIO, size: tuple[int, int] | None = None,
              compression: int = 6) -> int:
    """8-bit greyscale, non-interlaced PNG with no-filter scanlines.

    ``size`` is an optional declared (width, height) checked against the image.
    """
    image = _check_image(image)
    h, w = image.shape
    if size is not None and tuple(size) != (w, h):
        raise ValueError(f"declared size {tuple(size)} does not match image {w}x{h}")
    raw = np.zeros((h, w + 1), dtype=np.uint8)
    raw[:, 1:] = image
    data = (PNG_SIGNATURE
            + _chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
            + _chunk(b"IDAT", zlib.compress(raw.tobytes(), compression))
            + _chunk(b"IEND", b""))
    sink.write(data)
    return len(data)
