"""Feasible inexact projections computed by conditional gradient.

A point ``z`` in C is an eps-projection of ``u`` when

    <u - z, y - z> <= eps   for every y in C.

The Frank-Wolfe gap ``max_y <u - z, y - z>`` is attained at the vertex
returned by the linear-minimization oracle, so checking it once certifies the
inequality over the whole set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .feasible import FeasibleSetHandle

# ``eps = 0`` requests would otherwise spin on rounding noise
GAP_FLOOR = 1e-20


class ProjectionStatus(str, enum.Enum):
    GAP_SATISFIED = "GapSatisfied"
    MAX_ITERS = "MaxIters"


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    gap: float
    iterations: int
    status: ProjectionStatus

    @property
    def certified(self) -> bool:
        return self.status is ProjectionStatus.GAP_SATISFIED


def fw_gap(u: np.ndarray, z: np.ndarray, cset: FeasibleSetHandle) -> tuple[float, np.ndarray]:
    """Return ``(max_y <u - z, y - z>, argmax)`` over the set."""
    w = cset.lmo(z - u)
    return float(np.dot(u - z, w - z)), w


def condg(u, z0, eps: float, cset: FeasibleSetHandle, max_iters: int = 100) -> ProjectionResult:
    """Frank-Wolfe with exact line search on ``0.5 * ||z - u||^2`` over C.

    Stops as soon as the gap at the current point is at most ``eps``. The
    returned point is always feasible; ``status`` says whether the
    eps-certificate was reached within ``max_iters`` steps.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    u = np.asarray(u, dtype=float)
    z = np.array(z0, dtype=float)
    tol = max(eps, GAP_FLOOR)

    t = 0
    while True:
        gap, w = fw_gap(u, z, cset)
        if gap <= tol:
            return ProjectionResult(z, gap, t, ProjectionStatus.GAP_SATISFIED)
        if t >= max_iters:
            return ProjectionResult(z, gap, t, ProjectionStatus.MAX_ITERS)
        step = w - z
        sq = float(np.dot(step, step))
        assert sq > 0.0, "zero Frank-Wolfe direction with a positive gap"
        alpha = min(max(gap / sq, 0.0), 1.0)
        z = z + alpha * step
        t += 1


def truncated_step(x, u, cset) -> np.ndarray:
    """Farthest feasible point on the segment from feasible ``x`` towards ``u``."""
    step = u - x
    t = 1.0
    neg = step < 0
    if np.any(neg):
        t = min(t, float(np.min(-x[neg] / step[neg])))
    ds = float(step.sum())
    if ds > 0:
        t = min(t, (cset.d - float(x.sum())) / ds)
    t = max(t, 0.0)
    z = x + t * step
    return np.maximum(z, 0.0) if t < 1.0 else z


def clipped_point(u, cset) -> np.ndarray:
    """``max(u, 0)``, rescaled onto the cap if it exceeds it."""
    z = np.maximum(u, 0.0)
    total = z.sum()
    if total > cset.d:
        z *= cset.d / total
    return z


def inexact_project(u, z0, eps: float, cset: FeasibleSetHandle, mode: str = "inexact",
                    max_iters: int = 100, warm_start: str = "clipped") -> ProjectionResult:
    """eps-projection of ``u`` onto ``cset``, warm-started at the feasible ``z0``.

    ``mode="exact"`` uses the set's orthogonal projector, which is an
    eps-projection for every ``eps >= 0``; ``mode="inexact"`` runs
    :func:`condg`. When ``u`` is already feasible it is its own projection and
    is returned as is in both modes.
    """
    u = np.asarray(u, dtype=float)
    if mode == "exact":
        projector = getattr(cset, "exact_projector", None)
        if projector is None:
            raise ConfigurationError("exact projection requested but the set has none")
        return ProjectionResult(projector(u), 0.0, 0, ProjectionStatus.GAP_SATISFIED)
    if mode != "inexact":
        raise ConfigurationError(f"unknown projection mode {mode!r}")
    if cset.contains(u):
        return ProjectionResult(u.copy(), 0.0, 0, ProjectionStatus.GAP_SATISFIED)
    if warm_start == "truncated":
        z0 = truncated_step(np.asarray(z0, dtype=float), u, cset)
    elif warm_start == "clipped":
        z0 = clipped_point(u, cset)
    return condg(u, z0, eps, cset, max_iters)
