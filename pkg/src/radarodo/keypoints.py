"""Gradient-weighted keypoint extraction from polar power scans.

The extractor scores every cell by how bright it is relative to the scan
mean and how flat its neighborhood is (low gradient), then greedily marks
peak regions in score order. A region on one azimuth is the inclusive span
between the nearest below-mean bins on either side of the visited cell.
Marking stops after ``l_max`` disjoint regions, or sooner once only
zero-or-below scores remain. Each contiguous marked run
on an azimuth yields at most one keypoint (its score maximum), and runs
with no range-overlapping marked cells on a neighboring azimuth are
discarded as single-beam clutter. Azimuth 0 and m-1 are neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .scan import PolarScan, SensorMeta, bins_to_points


class Keypoint(NamedTuple):
    azimuth_index: int
    range_bin: int
    x: float
    y: float
    strength: float


@dataclass(frozen=True, eq=False)
class KeypointSet:
    """Keypoints of one scan, ordered by (azimuth index, range bin)."""

    azimuths: np.ndarray
    range_bins: np.ndarray
    xy: np.ndarray
    strengths: np.ndarray
    meta: SensorMeta
    timestamp: float = 0.0

    def __len__(self):
        return self.azimuths.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i) -> Keypoint:
        return Keypoint(
            int(self.azimuths[i]),
            int(self.range_bins[i]),
            float(self.xy[i, 0]),
            float(self.xy[i, 1]),
            float(self.strengths[i]),
        )


def gradient_magnitude(scan: PolarScan) -> np.ndarray:
    """Prewitt gradient magnitude of the power grid, normalized to peak 1.

    The azimuth axis wraps (the scan is one full rotation); the range axis
    replicates its edge bins. An all-constant scan maps to all zeros.
    """
    p = np.pad(scan.power, ((1, 1), (0, 0)), mode="wrap")
    p = np.pad(p, ((0, 0), (1, 1)), mode="edge")
    ga = (p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]) - (p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:])
    gr = (p[:-2, 2:] + p[1:-1, 2:] + p[2:, 2:]) - (p[:-2, :-2] + p[1:-1, :-2] + p[2:, :-2])
    g = np.hypot(ga, gr)
    peak = g.max()
    return g / peak if peak > 0 else g


def scoring_image(scan: PolarScan):
    """Return (H, S') where S' is mean-subtracted power and H = (1 - G) * S'."""
    s_prime = scan.power - scan.power.mean()
    h = (1.0 - gradient_magnitude(scan)) * s_prime
    return h, s_prime


def mark_regions(h: np.ndarray, s_prime: np.ndarray, l_max: int):
    """Greedily mark peak regions in descending ``h`` order.

    Returns (marked, region_count). ``region_count`` only advances when a
    newly marked span contains no previously marked cell. Marking stops at
    ``l_max`` regions, on a fully marked grid, or when no unmarked cell
    scores above zero: sub-zero cells are region boundaries, not regions,
    and marking them would let bare noise lend adjacency support to
    isolated detections. Score ties are visited in (azimuth, range) order.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    m, n = h.shape
    marked = np.zeros((m, n), dtype=bool)
    # stable argsort on the negated flat image = descending h, ties by (a, r)
    order = np.argsort(-h, axis=None, kind="stable")
    neg_by_row = [np.flatnonzero(s_prime[a] < 0.0) for a in range(m)]
    region_count = 0
    unmarked = m * n
    for flat in order:
        if region_count >= l_max or unmarked == 0:
            break
        if h.flat[flat] <= 0.0:
            break
        a, r = divmod(int(flat), n)
        if marked[a, r]:
            continue
        neg = neg_by_row[a]
        k_lo = np.searchsorted(neg, r, side="right") - 1
        r_lo = int(neg[k_lo]) if k_lo >= 0 else 0
        k_hi = np.searchsorted(neg, r, side="left")
        r_hi = int(neg[k_hi]) if k_hi < neg.size else n - 1
        span = marked[a, r_lo : r_hi + 1]
        if not span.any():
            region_count += 1
        unmarked -= int(span.size - span.sum())
        span[:] = True
    return marked, region_count


def _runs(row: np.ndarray):
    """Yield (lo, hi) for each maximal contiguous True run of a bool row."""
    idx = np.flatnonzero(row)
    if idx.size == 0:
        return
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    for s, e in zip(starts, ends):
        yield int(idx[s]), int(idx[e])


def extract_keypoints(scan: PolarScan, l_max: int = 1000) -> KeypointSet:
    """Extract at most one keypoint per marked run per azimuth.

    A run survives only if some cell of its range span is also marked on an
    adjacent azimuth, and only if its best score is strictly positive.
    """
    h, s_prime = scoring_image(scan)
    marked, _ = mark_regions(h, s_prime, l_max)
    m = scan.meta.num_azimuths
    az, rb, strength = [], [], []
    for a in range(m):
        up, down = (a - 1) % m, (a + 1) % m
        for lo, hi in _runs(marked[a]):
            if not (marked[up, lo : hi + 1].any() or marked[down, lo : hi + 1].any()):
                continue
            seg = h[a, lo : hi + 1]
            j = int(np.argmax(seg))
            if seg[j] <= 0.0:
                continue
            az.append(a)
            rb.append(lo + j)
            strength.append(float(seg[j]))
    az = np.asarray(az, dtype=int)
    rb = np.asarray(rb, dtype=int)
    return KeypointSet(
        azimuths=az,
        range_bins=rb,
        xy=bins_to_points(az, rb, scan.meta).reshape(-1, 2),
        strengths=np.asarray(strength, dtype=float),
        meta=scan.meta,
        timestamp=scan.timestamp,
    )


def write_keypoints_csv(path, kset: KeypointSet) -> None:
    """Write keypoints as CSV rows of (azimuth_index, range_bin, x, y, strength)."""
    with open(path, "w", encoding="ascii") as f:
        f.write("azimuth_index,range_bin,x,y,strength\n")
        for kp in kset:
            f.write(f"{kp.azimuth_index},{kp.range_bin},{kp.x!r},{kp.y!r},{kp.strength!r}\n")
