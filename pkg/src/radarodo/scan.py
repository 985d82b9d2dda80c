"""Polar scan container, bin geometry, and the on-disk scan format.

A scan is an (azimuths x range bins) grid of non-negative linear power.
Azimuth index a points along angle 2*pi*a/m (counter-clockwise from +x),
range bin r covers [r, r+1) * resolution and is located at its center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SCAN_MAGIC = b"#polarscan1\n"


@dataclass(frozen=True)
class SensorMeta:
    """Geometry of one full rotation: bin counts, range scale, rotation time."""

    num_azimuths: int
    num_range_bins: int
    range_resolution: float
    scan_period: float

    def __post_init__(self):
        if self.num_azimuths < 2 or self.num_range_bins < 2:
            raise ValueError("need at least 2 azimuths and 2 range bins")
        if not (self.range_resolution > 0.0) or not (self.scan_period > 0.0):
            raise ValueError("range_resolution and scan_period must be positive")

    @property
    def max_range(self) -> float:
        return self.num_range_bins * self.range_resolution


@dataclass(frozen=True, eq=False)
class PolarScan:
    """One radar rotation. ``power`` has shape (num_azimuths, num_range_bins)."""

    meta: SensorMeta
    power: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        power = np.asarray(self.power, dtype=float)
        if power.shape != (self.meta.num_azimuths, self.meta.num_range_bins):
            raise ValueError(
                f"power shape {power.shape} does not match meta "
                f"({self.meta.num_azimuths}, {self.meta.num_range_bins})"
            )
        if not np.all(np.isfinite(power)) or np.any(power < 0.0):
            raise ValueError("power must be finite and non-negative")
        power = power.copy()
        power.setflags(write=False)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "timestamp", float(self.timestamp))


def azimuth_angle(a, meta: SensorMeta):
    """Beam angle (radians, CCW from +x) of azimuth index ``a``."""
    return 2.0 * math.pi * np.asarray(a) / meta.num_azimuths


def bin_center_range(r, meta: SensorMeta):
    """Range (meters) of the center of range bin ``r``."""
    return (np.asarray(r) + 0.5) * meta.range_resolution


def bin_to_point(a: int, r: int, meta: SensorMeta) -> np.ndarray:
    """Cartesian (x, y) of the center of cell (a, r), sensor at the origin."""
    if not (0 <= a < meta.num_azimuths):
        raise ValueError(f"azimuth index {a} out of range [0, {meta.num_azimuths})")
    if not (0 <= r < meta.num_range_bins):
        raise ValueError(f"range bin {r} out of range [0, {meta.num_range_bins})")
    return bins_to_points(np.array([a]), np.array([r]), meta)[0]


def bins_to_points(a, r, meta: SensorMeta) -> np.ndarray:
    """Vectorized ``bin_to_point`` without index validation. Returns (N, 2)."""
    ang = azimuth_angle(a, meta)
    rng = bin_center_range(r, meta)
    return np.stack([rng * np.cos(ang), rng * np.sin(ang)], axis=-1)


def point_range(p) -> float:
    """Euclidean distance of a point from the sensor origin."""
    p = np.asarray(p, dtype=float)
    return float(np.hypot(p[..., 0], p[..., 1]))


def save_scan(path, scan: PolarScan) -> None:
    """Write a scan to ``path``.

    Format: a magic line, one text header line (bin counts as integers,
    floats as C99 hex so the round trip is bit exact), then the power grid
    as raw little-endian float64 in azimuth-major order.
    """
    meta = scan.meta
    header = "{} {} {} {} {}\n".format(
        meta.num_azimuths,
        meta.num_range_bins,
        meta.range_resolution.hex(),
        meta.scan_period.hex(),
        scan.timestamp.hex(),
    )
    with open(path, "wb") as f:
        f.write(_SCAN_MAGIC)
        f.write(header.encode("ascii"))
        f.write(np.ascontiguousarray(scan.power, dtype="<f8").tobytes())


def load_scan(path) -> PolarScan:
    """Read a scan written by :func:`save_scan`."""
    with open(path, "rb") as f:
        magic = f.readline()
        if magic != _SCAN_MAGIC:
            raise ValueError(f"{path}: not a polar scan file")
        fields = f.readline().decode("ascii").split()
        if len(fields) != 5:
            raise ValueError(f"{path}: malformed scan header")
        m, n = int(fields[0]), int(fields[1])
        meta = SensorMeta(
            num_azimuths=m,
            num_range_bins=n,
            range_resolution=float.fromhex(fields[2]),
            scan_period=float.fromhex(fields[3]),
        )
        raw = f.read()
    expected = m * n * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, got {len(raw)}")
    power = np.frombuffer(raw, dtype="<f8").reshape(m, n)
    return PolarScan(meta=meta, power=power, timestamp=float.fromhex(fields[4]))
