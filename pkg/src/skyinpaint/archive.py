"""Binary field archive (``.skyf``).

Layout, all little-endian::

    offset  size        content
    0       4           magic b"SKYF"
    4       2           version (u16, currently 1)
    6       4           width W (u32)
    10      4           height H (u32)
    14      2           flags (u16); bit 0 set = solved archive
    16      ceil(N/8)   known-pixel bitmap, N = W*H, row-major, LSB first
    ...     8*K         float64 values

Ingest archives store values for the K known pixels only, in row-major
order. Solved archives store all K = N values; the bitmap still records
which pixels were data.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .grid import AngularGrid, InpaintingMask, SignalField

MAGIC = b"SKYF"
VERSION = 1
FLAG_SOLVED = 0x1
_HEADER = struct.Struct("<4sHIIH")


class ArchiveFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FieldArchive:
    field: SignalField
    mask: InpaintingMask
    solved: bool = False

    @property
    def grid(self) -> AngularGrid:
        return self.field.grid


def encode(archive: FieldArchive) -> bytes:
    grid = archive.grid
    grid.check_same(archive.mask.grid)
    known = archive.mask.known
    values = archive.field.values if archive.solved else archive.field.values[known]
    header = _HEADER.pack(MAGIC, VERSION, grid.width, grid.height,
                          FLAG_SOLVED if archive.solved else 0)
    return (header + np.packbits(known, bitorder="little").tobytes()
            + values.astype("<f8").tobytes())


def decode(data: bytes) -> FieldArchive:
    if len(data) < _HEADER.size:
        raise ArchiveFormatError("archive truncated inside header")
    magic, version, width, height, flags = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ArchiveFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ArchiveFormatError(f"unsupported archive version {version}")
    if flags & ~FLAG_SOLVED:
        raise ArchiveFormatError(f"unknown flag bits 0x{flags:04x}")
    try:
        grid = AngularGrid(width, height)
    except ValueError as exc:
        raise ArchiveFormatError(f"invalid grid in archive: {exc}") from None
    n = grid.size
    pos = _HEADER.size
    nbytes = (n + 7) // 8
    if len(data) < pos + nbytes:
        raise ArchiveFormatError("archive truncated inside mask bitmap")
    bits = np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=pos)
    known = np.unpackbits(bits, count=n, bitorder="little").astype(bool)
    pos += nbytes
    solved = bool(flags & FLAG_SOLVED)
    count = n if solved else int(known.sum())
    if len(data) != pos + 8 * count:
        raise ArchiveFormatError(f"expected {pos + 8 * count} bytes, found {len(data)}")
    stored = np.frombuffer(data, dtype="<f8", count=count, offset=pos).astype(np.float64)
    if solved:
        values = stored
    else:
        values = np.zeros(n)
        values[known] = stored
    return FieldArchive(SignalField(grid, values), InpaintingMask(grid, known), solved)


def write_archive(archive: FieldArchive, sink: BinaryIO | str | Path) -> int:
    data = encode(archive)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return len(data)


def read_archive(source: BinaryIO | str | Path) -> FieldArchive:
    data = Path(source).read_bytes() if isinstance(source, (str, Path)) else source.read()
    return decode(data)
