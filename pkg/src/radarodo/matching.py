"""Spectral selection of a consistent subset of candidate matches.

Candidate pairs are scored against each other by how well they preserve
pairwise distances between the two scans. The principal eigenvector of that
compatibility matrix concentrates on the largest mutually consistent group;
a greedy sweep over its squared entries then commits candidates one at a
time, enforcing one-to-one use of keypoints, and stops as soon as a
cosine-based consistency index drops. Two confidence measures come out of
the process: the consistency index of the final selection and a normalized
eigengap of the selection-restricted matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .descriptors import UnaryMatches, _points
from .errors import DegenerateProblemError, NoCompatibilityError


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    eigenvector: np.ndarray
    eigenvalue: float
    iterations: int


@dataclass(frozen=True, eq=False)
class MatchSelection:
    """Committed matches plus the confidence measures of the selection."""

    selected: tuple  # (L1 index, L2 index) pairs in commit order
    indicator: np.ndarray
    mutual_compatibility: float
    eigengap: float
    global_score: float


def pairwise_compatibility(u_matches: UnaryMatches, l1, l2, sigma: float) -> np.ndarray:
    """Symmetric (u, u) matrix of pairwise consistency scores.

    Entry (g, h) is a Gaussian kernel over how much the distance between the
    two L1 keypoints differs from the distance between their proposed L2
    counterparts; discrepancies beyond 3 sigma are cut to exactly zero. The
    diagonal is zero, and so are entries of candidate pairs that share a
    keypoint on either side (they can never be selected together).
    """
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    u = u_matches.u
    if u < 2:
        raise DegenerateProblemError(f"need at least 2 candidates, got {u}")
    p1 = _points(l1)[u_matches.l1_indices]
    p2 = _points(l2)[u_matches.l2_indices]
    d1 = np.hypot(p1[:, 0:1] - p1[None, :, 0], p1[:, 1:2] - p1[None, :, 1])
    d2 = np.hypot(p2[:, 0:1] - p2[None, :, 0], p2[:, 1:2] - p2[None, :, 1])
    delta = np.abs(d1 - d2)
    c = np.exp(-(delta**2) / (2.0 * sigma**2))
    c[delta > 3.0 * sigma] = 0.0
    conflict = (u_matches.l1_indices[:, None] == u_matches.l1_indices[None, :]) | (
        u_matches.l2_indices[:, None] == u_matches.l2_indices[None, :]
    )
    c[conflict] = 0.0
    return c


def _power_iteration(c, v0, tol, max_iter, sign_invariant=False):
    """Power iteration returning (rayleigh, vector, iterations).

    With ``sign_invariant`` the convergence test ignores sign flips, which a
    dominant negative eigenvalue produces on every step.
    """
    v = v0
    its = 0
    for its in range(1, max_iter + 1):
        y = c @ v
        norm = np.linalg.norm(y)
        if norm == 0.0:
            break
        y /= norm
        step = np.linalg.norm(y - v)
        if sign_invariant:
            step = min(step, np.linalg.norm(y + v))
        v = y
        if step < tol:
            break
    return float(v @ c @ v), v, its


def principal_eigenvector(c: np.ndarray, tol: float = 1e-9, max_iter: int = 1000) -> SpectralSolution:
    """Dominant eigenvector of a non-negative symmetric matrix.

    Power iteration from the uniform unit vector; converged when successive
    iterates differ by less than ``tol`` in Euclidean norm. The eigenvector
    is entrywise non-negative (sign fixed) and the eigenvalue reported is
    the Rayleigh quotient.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("compatibility matrix must be square")
    if not c.any():
        raise NoCompatibilityError("compatibility matrix is identically zero")
    u = c.shape[0]
    v0 = np.full(u, 1.0 / math.sqrt(u))
    lam, v, its = _power_iteration(c, v0, tol, max_iter)
    if v.sum() < 0:
        v = -v
    return SpectralSolution(eigenvector=v, eigenvalue=lam, iterations=its)


def mutual_compatibility_index(c: np.ndarray, v_star: np.ndarray, indicator) -> float:
    """Cosine between C (indicator * v_star) and the indicator; 0 if the
    projected vector vanishes."""
    m = np.asarray(indicator, dtype=float)
    if not m.any():
        raise ValueError("indicator selects no candidates")
    w = c @ (m * v_star)
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return 0.0
    return float(np.clip((w @ m) / (nw * np.linalg.norm(m)), 0.0, 1.0))


def global_score(indicator, c: np.ndarray) -> float:
    """Rayleigh quotient of the indicator: total pairwise consistency per match."""
    m = np.asarray(indicator, dtype=float)
    if not m.any():
        raise ValueError("indicator selects no candidates")
    return float((m @ c @ m) / (m @ m))


def eigengap_measure(c: np.ndarray, selected_rows) -> float:
    """Normalized gap between the two dominant eigenvalues of the
    selection-restricted matrix, clamped to [0, 1].

    Rows and columns of non-selected candidates are zeroed. Both eigenvalues
    come from power iteration, the second after deflating the first; a large
    gap means the selection stands out against every alternative grouping.
    """
    rows = np.asarray(selected_rows, dtype=int)
    if rows.size < 1:
        raise ValueError("need at least one selected candidate")
    u = c.shape[0]
    keep = np.zeros(u, dtype=bool)
    keep[rows] = True
    cstar = np.where(keep[:, None] & keep[None, :], c, 0.0)
    if not cstar.any():
        return 0.0
    lam1, v1, _ = _power_iteration(cstar, np.full(u, 1.0 / math.sqrt(u)), 1e-9, 1000)
    deflated = cstar - lam1 * np.outer(v1, v1)
    # a fixed-seed start: the uniform vector can be exactly orthogonal to the
    # runner-up eigenvector (e.g. two equal disjoint groups)
    v0 = np.random.default_rng(0).standard_normal(u)
    v0 -= (v0 @ v1) * v1
    n0 = np.linalg.norm(v0)
    if n0 == 0.0:
        return float(np.clip(lam1 / u, 0.0, 1.0))
    lam2, _, _ = _power_iteration(deflated, v0 / n0, 1e-9, 1000, sign_invariant=True)
    return float(np.clip((lam1 - lam2) / u, 0.0, 1.0))


def greedy_select(c: np.ndarray, solution: SpectralSolution, u_matches: UnaryMatches) -> MatchSelection:
    """Commit candidates in decreasing squared-eigenvector order.

    Each tentative commit is kept only if the mutual compatibility index did
    not drop; the first candidate is always kept. Committing a candidate
    removes every candidate sharing one of its keypoints from further
    consideration, so the selection always uses each keypoint at most once.
    """
    v = solution.eigenvector
    u = u_matches.u
    if c.shape != (u, u):
        raise ValueError("compatibility matrix does not match candidate count")
    weight = v**2
    open_mask = np.ones(u, dtype=bool)
    indicator = np.zeros(u)
    rows = []
    current = None
    while open_mask.any():
        g = int(np.argmax(np.where(open_mask, weight, -np.inf)))
        indicator[g] = 1.0
        score = mutual_compatibility_index(c, v, indicator)
        if current is not None and score < current:
            indicator[g] = 0.0
            break
        current = score
        rows.append(g)
        open_mask &= u_matches.l1_indices != u_matches.l1_indices[g]
        open_mask &= u_matches.l2_indices != u_matches.l2_indices[g]
    selected = tuple(
        (int(u_matches.l1_indices[g]), int(u_matches.l2_indices[g])) for g in rows
    )
    return MatchSelection(
        selected=selected,
        indicator=indicator,
        mutual_compatibility=float(current),
        eigengap=eigengap_measure(c, np.asarray(rows)),
        global_score=global_score(indicator, c),
    )
