"""Projected inexact Levenberg-Marquardt iteration with feasible inexact projections.

Each outer step solves the regularized normal equations
``(V^T V + mu I) d = -V^T f`` only up to a residual ``||r|| <= zeta`` and maps
``x + d`` back to the feasible set with an eps-projection, eps = (theta_k ||d||)^2.
``projection_mode="exact"`` gives the exact-projection variant.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linsolve import InnerStatus, RegularizedNormalOperator, bicgstab, dense_direct_solve
from .problem import IterationRecord, ProblemInstance, SolveReport, SolverConfig, TerminationStatus
from .projection import inexact_project

log = logging.getLogger(__name__)


class InsufficientDecay(ValueError):
    """The error sequence does not decay enough to fit an order."""


def regularization_mu(V, f_val, eta: float, sigma: float, mu_floor: float) -> float:
    g = float(np.linalg.norm(V.rmatvec(f_val)))
    return max(eta * g**sigma, mu_floor)


def residual_tolerance_zeta(mu: float, f_norm: float, sigma: float, c_nu: float = 1.0,
                            nu_max: float = 1.0, zeta_min: float = 1e-15) -> float:
    """``mu * min(nu_max, c_nu f^(sigma/2)) * c_nu f``, floored at ``zeta_min``.

    The distance to the solution set is not observable, so ``||f(x_k)||``
    stands in for it (the two are comparable under a local error bound).
    """
    nu = min(nu_max, c_nu * f_norm ** (0.5 * sigma))
    return max(mu * nu * c_nu * f_norm, zeta_min)


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def solve(problem: ProblemInstance, x0, config: Optional[SolverConfig] = None) -> SolveReport:
    config = config or SolverConfig()
    cset = problem.feasible_set
    x = np.array(x0, dtype=float)
    if not cset.contains(x, 1e-10):
        raise ValueError("starting point is not feasible")
    xs = problem.known_solution

    trace = [x.copy()]
    records: list[IterationRecord] = []
    f_norms: list[float] = []
    steps: list[np.ndarray] = []
    errors = None if xs is None else [float(np.linalg.norm(x - xs))]
    t0 = time.perf_counter()

    def finish(status, message=""):
        return SolveReport(status, x, trace, records, f_norms, time.perf_counter() - t0, errors,
                           message, steps)

    k = 0
    while True:
        f = np.asarray(problem.residual(x), dtype=float)
        if not _finite(f):
            return finish(TerminationStatus.NUMERICAL_BREAKDOWN, "non-finite residual")
        f_norm = float(np.linalg.norm(f))
        f_norms.append(f_norm)
        if f_norm < config.outer_tol:
            return finish(TerminationStatus.CONVERGED)
        if k >= config.max_outer_iters:
            return finish(TerminationStatus.MAX_ITERATIONS)

        V = problem.jacobian(x)
        rhs = -V.rmatvec(f)
        g_norm = float(np.linalg.norm(rhs))
        mu = max(config.eta * g_norm**config.sigma, config.mu_floor)
        zeta = residual_tolerance_zeta(mu, f_norm, config.sigma, config.c_nu, config.nu_max,
                                       config.zeta_min)
        # never accept d = 0 as the inner solution while V^T f != 0
        zeta = max(min(zeta, config.forcing_cap * g_norm), config.zeta_min)

        op = RegularizedNormalOperator(V, mu)
        inner = bicgstab(op, rhs, zeta, config.max_inner_iters)
        inner_iters = inner.iterations
        if inner.status is not InnerStatus.CONVERGED:
            log.debug("k=%d bicgstab %s after %d its, restarting", k, inner.status.value, inner_iters)
            inner = bicgstab(op, rhs, zeta, config.max_inner_iters, x0=inner.d)
            inner_iters += inner.iterations
        d = inner.d
        r_norm = inner.residual_norm
        inner_status = inner.status.value
        if inner.status is not InnerStatus.CONVERGED:
            if problem.n > config.dense_fallback_max_n:
                return finish(TerminationStatus.INNER_SOLVER_FAILURE,
                              f"bicgstab {inner.status.value} at k={k}")
            d = dense_direct_solve(op, rhs, config.dense_fallback_max_n)
            r_norm = float(np.linalg.norm(op(d) - rhs))
            inner_status = "DenseFallback"
        if not _finite(d):
            return finish(TerminationStatus.NUMERICAL_BREAKDOWN, "non-finite step")

        d_norm = float(np.linalg.norm(d))
        eps = (config.theta_k(k) * d_norm) ** 2
        proj = inexact_project(x + d, x, eps, cset, config.projection_mode,
                               config.max_projection_iters, config.warm_start)
        if not _finite(proj.point):
            return finish(TerminationStatus.NUMERICAL_BREAKDOWN, "non-finite projection")
        if not proj.certified and config.require_certified_projection:
            return finish(TerminationStatus.PROJECTION_FAILURE,
                          f"projection gap {proj.gap:.3e} > eps {eps:.3e} at k={k}")

        x = proj.point
        trace.append(x.copy())
        steps.append(d)
        err = None
        if errors is not None:
            err = float(np.linalg.norm(x - xs))
            errors.append(err)
        records.append(IterationRecord(
            k=k, f_norm=f_norm, mu=mu, zeta=zeta, r_norm=r_norm, d_norm=d_norm, eps=eps,
            projection_iters=proj.iterations, projection_gap=proj.gap,
            projection_certified=proj.certified, inner_iters=inner_iters,
            inner_status=inner_status, error=err,
        ))
        log.debug("k=%d |f|=%.3e mu=%.3e zeta=%.3e inner=%d proj=%d", k, f_norm, mu, zeta,
                  inner_iters, proj.iterations)
        k += 1


def estimate_convergence_order(errors, **kwargs) -> float:
    """Fitted q-order of an error sequence; see :func:`fit_convergence_order`."""
    return fit_convergence_order(errors, **kwargs).order


@dataclass(frozen=True)
class OrderFit:
    order: float
    intercept: float
    pairs: list


def fit_convergence_order(errors, upper: float = 1e-2, floor: Optional[float] = None,
                          scale: float = 1.0, min_span_decades: float = 4.0,
                          stall_ratio: float = 0.9) -> OrderFit:
    """Least-squares slope of ``log e_{k+1}`` against ``log e_k``.

    The fit uses the decaying run that starts at the first error below
    ``upper`` and ends before the first pair that stalls
    (``e_{k+1} >= stall_ratio * e_k``) or drops under ``floor``. ``floor``
    defaults to the larger of ten times machine precision times ``scale`` (the
    solution's magnitude) and ten times the smallest error reached, so the
    rounding plateau at the end of the trace is left out.
    """
    e = np.asarray(errors, dtype=float)
    pos = e[e > 0]
    if floor is None:
        floor = 10 * np.finfo(float).eps * max(scale, 1.0)
        if pos.size:
            floor = max(floor, 10 * pos.min())
    if e.size < 4 or pos.size < 2 or math.log10(pos.max() / pos.min()) < min_span_decades:
        raise InsufficientDecay("error sequence spans too few decades")
    below = np.nonzero(e <= upper)[0]
    if below.size == 0:
        raise InsufficientDecay(f"no error below {upper:g}")
    pairs = []
    for k in range(int(below[0]), e.size - 1):
        a, b = e[k], e[k + 1]
        if a < floor or b < floor or b >= stall_ratio * a:
            break
        pairs.append((a, b))
    if len(pairs) < 2:
        raise InsufficientDecay(f"only {len(pairs)} usable consecutive error pairs")
    x = np.log10([p[0] for p in pairs])
    y = np.log10([p[1] for p in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    return OrderFit(float(slope), float(intercept), pairs)
