"""Projected inexact Levenberg-Marquardt solvers for constrained nonsmooth equations."""

from .cave import CaveInstance, default_start, generate_instance, load_instance, save_instance
from .feasible import SimplexCapSet
from .ilmm import InsufficientDecay, estimate_convergence_order, solve
from .problem import JacobianOperator, ProblemInstance, SolveReport, SolverConfig, TerminationStatus, validate
from .projection import condg, inexact_project

__all__ = [
    "CaveInstance", "JacobianOperator", "InsufficientDecay", "ProblemInstance", "SimplexCapSet",
    "SolveReport", "SolverConfig", "TerminationStatus", "condg", "default_start",
    "estimate_convergence_order", "generate_instance", "inexact_project", "load_instance",
    "save_instance", "solve", "validate",
]
