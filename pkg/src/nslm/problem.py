"""Data carried through a solve of ``f(x) = 0, x in C``."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .feasible import FeasibleSetHandle


class JacobianOperator:
    """Matrix-free linear map ``V`` with forward and transpose application."""

    def __init__(self, shape: tuple[int, int], matvec: Callable, rmatvec: Callable):
        self.shape = (int(shape[0]), int(shape[1]))
        self._matvec = matvec
        self._rmatvec = rmatvec

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self._matvec(v), dtype=float)

    def rmatvec(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(self._rmatvec(w), dtype=float)

    @classmethod
    def from_matrix(cls, M) -> "JacobianOperator":
        """Wrap a dense array or scipy sparse matrix."""
        return cls(M.shape, lambda v: M @ v, lambda w: M.T @ w)

    def to_dense(self) -> np.ndarray:
        """Materialize column by column; test oracles only."""
        m, n = self.shape
        return np.column_stack([self.matvec(e) for e in np.eye(n)]) if n else np.zeros((m, 0))


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], JacobianOperator]
    feasible_set: FeasibleSetHandle
    m: Optional[int] = None
    known_solution: Optional[np.ndarray] = None

    @property
    def n_residuals(self) -> int:
        return self.n if self.m is None else self.m


class TerminationStatus(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    INNER_SOLVER_FAILURE = "InnerSolverFailure"
    PROJECTION_FAILURE = "ProjectionFailure"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the projected inexact LM loop.

    ``theta_schedule`` picks theta_k in [0, theta): ``"half"`` keeps it at
    theta / 2, ``"decreasing"`` uses theta / (k + 2), ``"zero"`` uses 0.
    The inner residual bound is
    ``zeta = mu * min(nu_max, c_nu * |f|^(sigma/2)) * c_nu * |f|``, clipped to
    ``[zeta_min, forcing_cap * |V^T f|]``.
    """

    eta: float = 1.0
    sigma: float = 0.5
    theta: float = 1e-2
    theta_schedule: str = "half"
    outer_tol: float = 1e-6
    max_outer_iters: int = 100
    max_inner_iters: int = 5000
    max_projection_iters: int = 100
    projection_mode: str = "inexact"
    warm_start: str = "clipped"
    c_nu: float = 1.0
    nu_max: float = 1.0
    zeta_min: float = 1e-15
    forcing_cap: float = 1e-6
    mu_floor: float = 1e-12
    dense_fallback_max_n: int = 500
    require_certified_projection: bool = False

    def __post_init__(self):
        if not self.eta >= 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.theta_schedule not in ("half", "decreasing", "zero"):
            raise ValueError(f"unknown theta_schedule {self.theta_schedule!r}")
        if self.projection_mode not in ("exact", "inexact"):
            raise ValueError(f"unknown projection_mode {self.projection_mode!r}")
        for name in ("outer_tol", "c_nu", "nu_max", "zeta_min", "forcing_cap", "mu_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer_iters", "max_inner_iters", "max_projection_iters"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def theta_k(self, k: int) -> float:
        if self.theta_schedule == "half":
            return 0.5 * self.theta
        if self.theta_schedule == "decreasing":
            return self.theta / (k + 2)
        return 0.0


@dataclass
class IterationRecord:
    k: int
    f_norm: float
    mu: float
    zeta: float
    r_norm: float
    d_norm: float
    eps: float
    projection_iters: int
    projection_gap: float
    projection_certified: bool
    inner_iters: int
    inner_status: str
    error: Optional[float] = None


@dataclass
class SolveReport:
    status: TerminationStatus
    x: np.ndarray
    trace: list[np.ndarray]
    records: list[IterationRecord]
    f_norms: list[float]
    time_s: float
    errors: Optional[list[float]] = None
    message: str = ""
    steps: list[np.ndarray] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def converged(self) -> bool:
        return self.status is TerminationStatus.CONVERGED

    @property
    def final_residual(self) -> float:
        return self.f_norms[-1] if self.f_norms else float("nan")

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "time_s": self.time_s,
            "final_residual": self.final_residual,
            "message": self.message,
            "f_norms": list(self.f_norms),
            "errors": None if self.errors is None else list(self.errors),
            "records": [vars(r).copy() for r in self.records],
        }


def validate(problem: ProblemInstance, n_probes: int = 10, seed: int = 0,
             adjoint_rtol: float = 1e-10) -> list[str]:
    """Consistency checks; returns one message per failed check, empty if all pass."""
    issues: list[str] = []
    rng = np.random.default_rng(seed)
    n, m = problem.n, problem.n_residuals
    if problem.feasible_set.n != n:
        issues.append(f"feasible set dimension {problem.feasible_set.n} != n = {n}")

    x = rng.standard_normal(n)
    fx = np.asarray(problem.residual(x))
    if fx.shape != (m,):
        issues.append(f"residual has shape {fx.shape}, expected ({m},)")
        return issues
    if not np.array_equal(fx, problem.residual(x)):
        issues.append("residual evaluator is not deterministic")

    V = problem.jacobian(x)
    if V.shape != (m, n):
        issues.append(f"jacobian shape {V.shape}, expected ({m}, {n})")
        return issues
    worst = 0.0
    for _ in range(n_probes):
        v, w = rng.standard_normal(n), rng.standard_normal(m)
        Vv, VTw = V.matvec(v), V.rmatvec(w)
        lhs, rhs = float(np.dot(Vv, w)), float(np.dot(v, VTw))
        scale = max(np.linalg.norm(Vv) * np.linalg.norm(w), np.linalg.norm(v) * np.linalg.norm(VTw), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    if worst > adjoint_rtol:
        issues.append(f"adjoint identity violated: relative mismatch {worst:.3e}")
    v = rng.standard_normal(n)
    if not np.array_equal(V.matvec(v), problem.jacobian(x).matvec(v)):
        issues.append("jacobian element selection is not deterministic")

    xs = problem.known_solution
    if xs is not None:
        xs = np.asarray(xs, dtype=float)
        if xs.shape != (n,):
            issues.append(f"known_solution has shape {xs.shape}, expected ({n},)")
        else:
            fs = float(np.linalg.norm(problem.residual(xs)))
            if fs > 1e-12:
                issues.append(f"known_solution residual {fs:.3e} exceeds 1e-12")
            if not problem.feasible_set.contains(xs, 1e-10):
                issues.append("known_solution is not feasible")
    return issues
