"""Timing sweeps for the two pipeline stages with algorithmic knobs.

Two sweeps: data association time as a function of the region budget
(which drives the candidate count), and keypoint extraction time as a
function of grid size. Each point is the best of ``repeats`` runs; the
log-log slope of time against the swept parameter summarizes the scaling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .descriptors import propose_unary_matches
from .keypoints import extract_keypoints
from .matching import greedy_select, pairwise_compatibility, principal_eigenvector
from .odometry import PipelineConfig
from .scan import SensorMeta
from .se2 import Pose2
from .simulate import ArtifactModel, random_world, render_scan


@dataclass(frozen=True)
class BenchPoint:
    parameter: float
    seconds: float
    detail: dict


def loglog_slope(xs, ys) -> float:
    """Slope of the least-squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least 2 sweep points")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _busy_scene(meta: SensorMeta, seed: int):
    """A clutter-rich scan pair so the keypoint count tracks the region budget."""
    world = random_world(
        600, 0.85 * meta.max_range, seed=seed, min_range=4.0, reflectivity_range=(0.6, 2.0)
    )
    art = ArtifactModel(speckle_scale=0.15, background_noise=0.01, beam_width_azimuths=2.5)
    scan_a = render_scan(world, Pose2(), meta, art, seed=seed, timestamp=0.0)
    scan_b = render_scan(
        world, Pose2(0.4, 0.1, 0.01), meta, art, seed=seed + 1, timestamp=meta.scan_period
    )
    return scan_a, scan_b


def _best_of(fn, repeats: int) -> tuple[float, object]:
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def sweep_association(l_max_values, seed: int = 0, repeats: int = 3, meta: SensorMeta | None = None):
    """Time descriptor matching + spectral selection per region budget."""
    if len(l_max_values) < 3:
        raise ValueError("need at least 3 sweep points")
    meta = meta or SensorMeta(256, 256, 0.5, 0.25)
    scan_a, scan_b = _busy_scene(meta, seed)
    cfg = PipelineConfig(alpha=64, rho=64)
    points = []
    for l_max in l_max_values:
        kp_a = extract_keypoints(scan_a, l_max)
        kp_b = extract_keypoints(scan_b, l_max)
        l1, l2 = (kp_a, kp_b) if len(kp_a) <= len(kp_b) else (kp_b, kp_a)

        def run():
            unary = propose_unary_matches(l1, l2, cfg.alpha, cfg.rho, meta.max_range)
            c = pairwise_compatibility(unary, l1, l2, meta.range_resolution)
            return greedy_select(c, principal_eigenvector(c), unary)

        seconds, sel = _best_of(run, repeats)
        points.append(
            BenchPoint(
                parameter=float(l_max),
                seconds=seconds,
                detail={"u": len(l1), "selected": len(sel.selected)},
            )
        )
    return points


def sweep_extraction(grid_shapes, seed: int = 0, repeats: int = 3, l_max: int = 200):
    """Time keypoint extraction per (azimuths, range bins) grid shape."""
    if len(grid_shapes) < 3:
        raise ValueError("need at least 3 sweep points")
    world = random_world(120, 50.0, seed=seed, min_range=4.0)
    art = ArtifactModel(speckle_scale=0.3, background_noise=0.02)
    points = []
    for m, n in grid_shapes:
        meta = SensorMeta(m, n, 64.0 / n, 0.25)
        scan = render_scan(world, Pose2(), meta, art, seed=seed)
        seconds, kset = _best_of(lambda: extract_keypoints(scan, l_max), repeats)
        points.append(
            BenchPoint(
                parameter=float(m * n),
                seconds=seconds,
                detail={"azimuths": m, "range_bins": n, "keypoints": len(kset)},
            )
        )
    return points


def slope_of(points) -> float:
    return loglog_slope([p.parameter for p in points], [p.seconds for p in points])
