"""Inner solves of the regularized normal equations ``(V^T V + mu I) d = rhs``."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .problem import JacobianOperator

BREAKDOWN_TOL = 1e-30


class InnerStatus(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    BREAKDOWN = "Breakdown"


class RegularizedNormalOperator:
    """``v -> V^T (V v) + mu v``; one forward and one transpose V-application per call."""

    def __init__(self, V: JacobianOperator, mu: float):
        if not mu > 0:
            raise ValueError(f"mu must be positive, got {mu}")
        self.V = V
        self.mu = float(mu)
        self.n = V.shape[1]
        self.applications = 0

    def __call__(self, v: np.ndarray) -> np.ndarray:
        self.applications += 1
        return self.V.rmatvec(self.V.matvec(v)) + self.mu * v

    def to_dense(self) -> np.ndarray:
        M = self.V.to_dense()
        return M.T @ M + self.mu * np.eye(self.n)


@dataclass(frozen=True)
class InnerSolveResult:
    d: np.ndarray
    residual: np.ndarray
    residual_norm: float
    iterations: int
    status: InnerStatus


def _result(op, rhs, d, iterations, status) -> InnerSolveResult:
    r = op(d) - rhs
    return InnerSolveResult(d, r, float(np.linalg.norm(r)), iterations, status)


def bicgstab(op: RegularizedNormalOperator, rhs, zeta: float, max_iters: int,
             x0=None) -> InnerSolveResult:
    """BiCGSTAB stopped on the true residual ``||op(d) - rhs|| <= zeta``.

    The true residual is recomputed from scratch each iteration (one extra
    operator application) rather than trusting the recursively updated one.
    Starts from zero unless ``x0`` is given (used for restarts).
    """
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    if x0 is None:
        d = np.zeros(n)
        r = rhs.copy()
    else:
        d = np.array(x0, dtype=float)
        r = rhs - op(d)
    if np.linalg.norm(r) <= zeta:
        return _result(op, rhs, d, 0, InnerStatus.CONVERGED)

    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    for it in range(1, max_iters + 1):
        rho = float(np.dot(r_hat, r))
        if abs(rho) < BREAKDOWN_TOL:
            return _result(op, rhs, d, it - 1, InnerStatus.BREAKDOWN)
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        v = op(p)
        denom = float(np.dot(r_hat, v))
        if abs(denom) < BREAKDOWN_TOL:
            return _result(op, rhs, d, it - 1, InnerStatus.BREAKDOWN)
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= zeta:
            # half step may already satisfy the bound; confirm on the true residual
            d_half = d + alpha * p
            res = _result(op, rhs, d_half, it, InnerStatus.CONVERGED)
            if res.residual_norm <= zeta:
                return res
        t = op(s)
        tt = float(np.dot(t, t))
        if tt < BREAKDOWN_TOL:
            return _result(op, rhs, d + alpha * p, it, InnerStatus.BREAKDOWN)
        omega = float(np.dot(t, s)) / tt
        d = d + alpha * p + omega * s
        r = s - omega * t
        true_r = op(d) - rhs
        true_norm = float(np.linalg.norm(true_r))
        if true_norm <= zeta:
            return InnerSolveResult(d, true_r, true_norm, it, InnerStatus.CONVERGED)
        if abs(omega) < BREAKDOWN_TOL:
            return InnerSolveResult(d, true_r, true_norm, it, InnerStatus.BREAKDOWN)
        rho_old = rho
    return _result(op, rhs, d, max_iters, InnerStatus.MAX_ITERS)


def dense_direct_solve(op: RegularizedNormalOperator, rhs, max_n: int = 500) -> np.ndarray:
    """Cholesky solve on the materialized operator (oracle path, small n only)."""
    if op.n > max_n:
        raise ValueError(f"dense solve limited to n <= {max_n}, got {op.n}")
    M = op.to_dense()
    c, low = scipy.linalg.cho_factor(M)
    return scipy.linalg.cho_solve((c, low), np.asarray(rhs, dtype=float))


def least_squares_gradient(V: JacobianOperator, f: np.ndarray, mu: float, d: np.ndarray) -> np.ndarray:
    """Gradient of ``||f + V d||^2 + mu ||d||^2``; zero exactly at the LM step."""
    return 2.0 * (V.rmatvec(V.matvec(d) + f) + mu * d)
