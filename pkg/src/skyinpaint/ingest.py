"""Measurement records: parsing, pixel binning and rasterization.

Input files are delimited text with a header naming at least the columns
``time``, ``az``, ``el`` and ``dbm`` (any order, extra columns ignored).
Lines starting with ``#`` are comments. The delimiter is a comma when the
header contains one, otherwise any run of whitespace.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .grid import AngularGrid, InpaintingMask, PixelIndex, SignalField


class RecordFormatError(ValueError):
    """The stream does not have the expected header/columns."""


@dataclass(frozen=True)
class LineError:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


class RecordParseError(ValueError):
    """One or more data lines could not be parsed.

    ``batch`` holds every line that did parse, so callers may continue.
    """

    def __init__(self, errors: Sequence[LineError], batch: "RecordBatch", source: str = "<stream>"):
        self.errors = list(errors)
        self.batch = batch
        self.source = source
        head = "; ".join(str(e) for e in self.errors[:5])
        more = f" (+{len(self.errors) - 5} more)" if len(self.errors) > 5 else ""
        super().__init__(f"{source}: {len(self.errors)} bad line(s): {head}{more}")


def power_to_dbm(power_mw: float) -> float:
    """Power level in dBm for a power in milliwatts."""
    if not power_mw > 0:
        raise ValueError(f"power must be strictly positive, got {power_mw} mW")
    return 10.0 * math.log10(power_mw)


def _check_ranges(az: float, el: float, level: float) -> str | None:
    if not 0.0 <= az < 360.0:
        return f"azimuth {az} outside [0, 360)"
    if not 0.0 <= el <= 90.0:
        return f"elevation {el} outside [0, 90]"
    if not math.isfinite(level):
        return f"signal level {level} is not finite"
    return None


@dataclass(frozen=True)
class MeasurementRecord:
    timestamp: float
    azimuth_deg: float
    elevation_deg: float
    level_dbm: float

    def __post_init__(self):
        problem = _check_ranges(self.azimuth_deg, self.elevation_deg, self.level_dbm)
        if problem:
            raise ValueError(problem)


@dataclass(frozen=True)
class RecordFormat:
    delimiter: str | None = None
    time_column: str = "time"
    azimuth_column: str = "az"
    elevation_column: str = "el"
    level_column: str = "dbm"
    comment: str = "#"

    @property
    def required(self) -> tuple[str, str, str, str]:
        return (self.time_column, self.azimuth_column, self.elevation_column, self.level_column)


class RecordBatch:
    """Column-oriented records; the bulk form used for large inputs."""

    def __init__(self, timestamp, azimuth, elevation, level):
        self.timestamp = np.asarray(timestamp, dtype=np.float64).reshape(-1)
        self.azimuth = np.asarray(azimuth, dtype=np.float64).reshape(-1)
        self.elevation = np.asarray(elevation, dtype=np.float64).reshape(-1)
        self.level = np.asarray(level, dtype=np.float64).reshape(-1)
        n = self.timestamp.size
        if not (self.azimuth.size == self.elevation.size == self.level.size == n):
            raise ValueError("record columns differ in length")

    def __len__(self):
        return self.timestamp.size

    @classmethod
    def empty(cls) -> "RecordBatch":
        return cls([], [], [], [])

    @classmethod
    def from_records(cls, records: Iterable[MeasurementRecord]) -> "RecordBatch":
        rows = [(r.timestamp, r.azimuth_deg, r.elevation_deg, r.level_dbm) for r in records]
        if not rows:
            return cls.empty()
        return cls(*np.array(rows, dtype=np.float64).T)

    @classmethod
    def concat(cls, batches: Sequence["RecordBatch"]) -> "RecordBatch":
        if not batches:
            return cls.empty()
        return cls(*(np.concatenate([getattr(b, name) for b in batches])
                     for name in ("timestamp", "azimuth", "elevation", "level")))

    def validate(self) -> None:
        ok = ((self.azimuth >= 0) & (self.azimuth < 360)
              & (self.elevation >= 0) & (self.elevation <= 90)
              & np.isfinite(self.level))
        if not ok.all():
            k = int(np.argmin(ok))
            raise ValueError(f"record {k}: " + str(_check_ranges(
                self.azimuth[k], self.elevation[k], self.level[k])))

    def records(self) -> list[MeasurementRecord]:
        return [MeasurementRecord(*row) for row in zip(
            self.timestamp.tolist(), self.azimuth.tolist(),
            self.elevation.tolist(), self.level.tolist())]


def _text_lines(stream: IO) -> Iterable[str]:
    if isinstance(stream, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(stream, "mode", ""):
        return io.TextIOWrapper(stream, encoding="utf-8", newline=None)
    return stream


def parse_batch(stream: IO, fmt: RecordFormat = RecordFormat(), source: str = "<stream>") -> RecordBatch:
    """Parse a whole stream into columns.

    Raises :class:`RecordFormatError` for a missing header or column and
    :class:`RecordParseError` (after reading everything) for bad lines.
    """
    header = None
    delimiter = fmt.delimiter
    cols = None
    out: list[tuple[float, float, float, float]] = []
    errors: list[LineError] = []
    for lineno, raw in enumerate(_text_lines(stream), start=1):
        line = raw.strip()
        if not line or line.startswith(fmt.comment):
            continue
        if header is None:
            if delimiter is None:
                delimiter = "," if "," in line else ""
            header = [h.strip() for h in (line.split(delimiter) if delimiter else line.split())]
            missing = [c for c in fmt.required if c not in header]
            if missing:
                raise RecordFormatError(f"{source}: header lacks column(s) {', '.join(missing)}")
            cols = [header.index(c) for c in fmt.required]
            continue
        fields = line.split(delimiter) if delimiter else line.split()
        if len(fields) < len(header):
            errors.append(LineError(lineno, f"expected {len(header)} fields, got {len(fields)}"))
            continue
        try:
            t, az, el, lvl = (float(fields[c]) for c in cols)
        except ValueError as exc:
            errors.append(LineError(lineno, str(exc)))
            continue
        problem = _check_ranges(az, el, lvl)
        if problem:
            errors.append(LineError(lineno, problem))
            continue
        out.append((t, az, el, lvl))
    if header is None:
        raise RecordFormatError(f"{source}: no header line")
    batch = RecordBatch(*np.array(out, dtype=np.float64).reshape(-1, 4).T)
    if errors:
        raise RecordParseError(errors, batch, source)
    return batch


def parse_records(stream: IO, fmt: RecordFormat = RecordFormat(), source: str = "<stream>") -> list[MeasurementRecord]:
    return parse_batch(stream, fmt, source).records()


def write_records(batch: RecordBatch, stream: IO[str]) -> None:
    stream.write("time,az,el,dbm\n")
    for row in zip(batch.timestamp.tolist(), batch.azimuth.tolist(),
                   batch.elevation.tolist(), batch.level.tolist()):
        stream.write("%r,%r,%r,%r\n" % row)


def bin_angles(grid: AngularGrid, azimuth_deg, elevation_deg) -> np.ndarray:
    """Flat pixel index of the nearest grid point (half-way rounds up)."""
    az = np.asarray(azimuth_deg, dtype=np.float64)
    el = np.asarray(elevation_deg, dtype=np.float64)
    col = np.floor(az / (360.0 / grid.width) + 0.5).astype(np.int64) % grid.width
    row = np.floor(el / (90.0 / (grid.height - 1)) + 0.5).astype(np.int64)
    row = np.clip(row, 0, grid.height - 1)
    return row * grid.width + col


def bin_record(grid: AngularGrid, r: MeasurementRecord) -> PixelIndex:
    k = int(bin_angles(grid, r.azimuth_deg, r.elevation_deg))
    return PixelIndex(*divmod(k, grid.width))


class Accumulator:
    """Per-pixel sample collection with order-independent averaging.

    Sums are correctly rounded (``math.fsum``), so the result does not depend
    on the record order, and feeding every record twice leaves the means
    unchanged.
    """

    def __init__(self, grid: AngularGrid):
        self.grid = grid
        self._pixels: list[np.ndarray] = []
        self._levels: list[np.ndarray] = []
        self.records_seen = 0

    def add(self, batch: RecordBatch) -> None:
        batch.validate()
        self._pixels.append(bin_angles(self.grid, batch.azimuth, batch.elevation))
        self._levels.append(batch.level.copy())
        self.records_seen += len(batch)

    def _reduce(self):
        n = self.grid.size
        pix = np.concatenate(self._pixels) if self._pixels else np.zeros(0, np.int64)
        lvl = np.concatenate(self._levels) if self._levels else np.zeros(0)
        count = np.bincount(pix, minlength=n).astype(np.int64)
        total = np.zeros(n)
        single = count[pix] == 1
        total[pix[single]] = lvl[single]
        mp, ml = pix[~single], lvl[~single]
        order = np.argsort(mp, kind="stable")
        mp, ml = mp[order], ml[order]
        starts = np.flatnonzero(np.r_[True, mp[1:] != mp[:-1]]) if mp.size else np.zeros(0, np.int64)
        ends = np.r_[starts[1:], mp.size]
        for s, e in zip(starts.tolist(), ends.tolist()):
            total[mp[s]] = math.fsum(ml[s:e].tolist())
        if mp.size:
            bounds = (mp[starts], np.minimum.reduceat(ml, starts), np.maximum.reduceat(ml, starts))
        else:
            bounds = None
        return total, count, bounds

    def finalize(self) -> tuple[np.ndarray, np.ndarray]:
        """(sum, count) arrays of length N."""
        total, count, _ = self._reduce()
        return total, count

    def result(self) -> tuple[SignalField, InpaintingMask, np.ndarray]:
        """Averaged field, mask, and per-pixel sample counts."""
        total, count, bounds = self._reduce()
        known = count > 0
        values = np.zeros(self.grid.size)
        values[known] = total[known] / count[known]
        if bounds is not None:
            # the rounded mean may leave [min, max] by an ulp
            idx, lo, hi = bounds
            values[idx] = np.clip(values[idx], lo, hi)
        return SignalField(self.grid, values), InpaintingMask(self.grid, known), count


def overlap_stats(count: np.ndarray) -> dict:
    hits = count[count > 0]
    if hits.size == 0:
        return {"min": 0, "mean": 0.0, "max": 0}
    return {"min": int(hits.min()), "mean": float(hits.mean()), "max": int(hits.max())}


def rasterize_batch(grid: AngularGrid, batch: RecordBatch) -> tuple[SignalField, InpaintingMask]:
    acc = Accumulator(grid)
    acc.add(batch)
    field, mask, _ = acc.result()
    return field, mask


def rasterize(grid: AngularGrid, records: Iterable[MeasurementRecord]) -> tuple[SignalField, InpaintingMask]:
    """Average every record into its nearest pixel; untouched pixels are unknown (value 0)."""
    return rasterize_batch(grid, RecordBatch.from_records(records))
