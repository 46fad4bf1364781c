import numpy as np
import pytest

from nslm.cave import cave_residual
from nslm.problem import JacobianOperator, ProblemInstance, SolverConfig, validate


def test_cave_instance_is_valid(cave100):
    assert validate(cave100.to_problem()) == []


def test_known_solution_is_checked(cave100):
    problem = cave100.to_problem()
    assert problem.known_solution is not None
    assert validate(problem) == []
    bad = ProblemInstance(problem.n, problem.residual, problem.jacobian, problem.feasible_set,
                          known_solution=problem.known_solution + 1.0)
    assert any("known_solution" in msg for msg in validate(bad))


def test_wrong_transpose_is_reported(cave100):
    problem = cave100.to_problem()

    def jac(x):
        V = problem.jacobian(x)
        return JacobianOperator(V.shape, V.matvec, V.matvec)

    bad = ProblemInstance(problem.n, problem.residual, jac, problem.feasible_set)
    assert any("adjoint" in msg for msg in validate(bad))


def test_shape_mismatches_are_reported(cave100):
    problem = cave100.to_problem()
    bad = ProblemInstance(problem.n, lambda x: cave_residual(cave100, x)[:-1], problem.jacobian,
                          problem.feasible_set)
    assert any("shape" in msg for msg in validate(bad))


def test_nondeterministic_residual_is_reported(cave100):
    problem = cave100.to_problem()
    rng = np.random.default_rng(1)
    bad = ProblemInstance(problem.n, lambda x: problem.residual(x) + rng.standard_normal(problem.n),
                          problem.jacobian, problem.feasible_set)
    assert any("deterministic" in msg for msg in validate(bad))


@pytest.mark.parametrize("kwargs", [
    {"eta": 0.5}, {"sigma": 0.0}, {"sigma": 1.0}, {"theta": 0.0}, {"theta_schedule": "x"},
    {"projection_mode": "approx"}, {"outer_tol": 0.0}, {"max_outer_iters": -1},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_theta_schedules():
    assert SolverConfig().theta_k(5) == 5e-3
    assert SolverConfig(theta_schedule="decreasing").theta_k(0) == 5e-3
    assert SolverConfig(theta_schedule="zero").theta_k(3) == 0.0
