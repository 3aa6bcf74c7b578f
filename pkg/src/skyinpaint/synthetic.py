"""Synthetic contact data for tests, demos and scale runs.

A spacecraft near the Sun-Earth L1 point stays close to the sun direction,
so one daily contact traces the sun's diurnal arc. Arcs are generated from
the textbook solar position formulas for a station latitude, sampled while
the elevation exceeds a horizon mask, and given a smooth level profile.
"""
from __future__ import annotations

import numpy as np

from .ingest import RecordBatch

STATION_LATITUDE_DEG = 53.33
OBLIQUITY_DEG = 23.44


def sun_arc(day: int, step_s: float = 10.0, latitude_deg: float = STATION_LATITUDE_DEG,
            min_elevation_deg: float = 5.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(seconds since local noon, azimuth deg, elevation deg) for one day."""
    lat = np.radians(latitude_deg)
    decl = np.radians(OBLIQUITY_DEG) * np.sin(2 * np.pi * (day - 80) / 365.0)
    t = np.arange(-12 * 3600.0, 12 * 3600.0, step_s)
    hour = t * (2 * np.pi / 86400.0)
    sin_el = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour)
    el = np.degrees(np.arcsin(np.clip(sin_el, -1, 1)))
    az = np.degrees(np.arctan2(np.sin(hour),
                               np.cos(hour) * np.sin(lat) - np.tan(decl) * np.cos(lat))) + 180.0
    az = np.mod(az, 360.0)
    up = el >= min_elevation_deg
    return t[up], az[up], el[up]


def level_profile(azimuth_deg, elevation_deg, day) -> np.ndarray:
    """Smooth signal level in dBm: stronger at high elevation, mild seasonal drift."""
    az = np.radians(azimuth_deg)
    el = np.radians(elevation_deg)
    return (-104.0 + 14.0 * np.sin(el) + 1.5 * np.cos(az - 0.7)
            + 0.8 * np.sin(2 * np.pi * np.asarray(day) / 365.0))


def synthetic_year(days: int = 365, step_s: float = 10.0,
                   latitude_deg: float = STATION_LATITUDE_DEG) -> RecordBatch:
    """One contact per day for ``days`` days."""
    cols = []
    for d in range(days):
        t, az, el = sun_arc(d, step_s, latitude_deg)
        cols.append((d * 86400.0 + t, az, el, level_profile(az, el, d)))
    if not cols:
        return RecordBatch.empty()
    return RecordBatch(*(np.concatenate(c) for c in zip(*cols)))
