import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nslm.feasible import SimplexCapSet
from nslm.projection import (ConfigurationError, ProjectionStatus, condg, fw_gap, inexact_project)

from oracles import project_cap_bruteforce, vertex_gap

CAP = SimplexCapSet(2, 1.0)


def test_feasible_u_is_a_fixed_point():
    z0 = np.array([0.1, 0.1])
    res = condg(z0, z0, 0.0, CAP)
    np.testing.assert_array_equal(res.point, z0)
    assert res.iterations == 0 and res.gap == 0.0 and res.certified


def test_tight_tolerance_reaches_the_projection():
    res = condg(np.array([2.0, 2.0]), np.zeros(2), 1e-10, CAP, max_iters=10_000)
    assert res.certified
    np.testing.assert_allclose(res.point, [0.5, 0.5], atol=1e-4)


def test_loose_tolerance_stays_within_sqrt_eps():
    u = np.array([2.0, 2.0])
    res = condg(u, np.zeros(2), 0.25, CAP)
    assert res.certified and res.gap <= 0.25
    p = project_cap_bruteforce(u, 1.0)
    assert np.linalg.norm(res.point - p) <= np.sqrt(0.25) + 1e-12


def test_exact_mode_uses_projector():
    res = inexact_project(np.array([2.0, 2.0]), np.zeros(2), 0.0, CAP, mode="exact")
    np.testing.assert_allclose(res.point, [0.5, 0.5], atol=1e-15)
    assert res.gap == 0.0


def test_step_sized_tolerance_is_certified():
    z0 = np.array([0.2, 0.3])
    u = np.array([1.4, -0.3])
    eps = (1e-2 * np.linalg.norm(u - z0)) ** 2
    res = inexact_project(u, z0, eps, CAP, max_iters=10_000)
    assert res.certified
    assert CAP.contains(res.point)
    assert vertex_gap(u, res.point, 1.0) <= eps + 1e-12


@pytest.mark.parametrize("warm_start", ["iterate", "truncated", "clipped"])
def test_huge_tolerance_accepts_warm_start(warm_start):
    z0 = np.array([0.2, 0.3])
    u = np.array([3.0, -1.0])
    res = inexact_project(u, z0, 1e6, CAP, warm_start=warm_start)
    assert res.iterations == 0
    if warm_start == "iterate":
        np.testing.assert_array_equal(res.point, z0)


def test_unknown_mode_and_missing_projector():
    with pytest.raises(ConfigurationError):
        inexact_project(np.ones(2), np.zeros(2), 0.1, CAP, mode="approximate")

    class NoProjector:
        n, d = 2, 1.0

    with pytest.raises(ConfigurationError):
        inexact_project(np.ones(2), np.zeros(2), 0.1, NoProjector(), mode="exact")


def test_iteration_cap_reports_max_iters():
    cset = SimplexCapSet(5, 1.0)
    res = condg(np.array([1.0, 0.9, 0.8, 0.7, 0.6]), np.zeros(5), 0.0, cset, max_iters=3)
    assert res.status is ProjectionStatus.MAX_ITERS and not res.certified
    assert res.iterations == 3 and cset.contains(res.point)


def test_gap_matches_vertex_enumeration(rng):
    for _ in range(200):
        n = rng.integers(2, 8)
        d = rng.uniform(0.5, 3)
        cset = SimplexCapSet(n, d)
        u = rng.normal(scale=2, size=n)
        z = cset.sample(rng)[0]
        assert fw_gap(u, z, cset)[0] == pytest.approx(vertex_gap(u, z, d), abs=1e-12)


def test_objective_decreases_with_more_steps(rng):
    cset = SimplexCapSet(6, 2.0)
    for _ in range(20):
        u = rng.normal(scale=2, size=6)
        vals = [np.linalg.norm(condg(u, np.zeros(6), 0.0, cset, max_iters=t).point - u)
                for t in range(25)]
        assert np.all(np.diff(vals) <= 1e-12)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 8), d=st.floats(0.1, 10),
       data=st.data(), eps=st.floats(1e-8, 1.0))
def test_eps_projection_is_near_exact_projection(n, d, data, eps):
    elems = st.floats(-10, 10, allow_nan=False)
    u = data.draw(arrays(float, n, elements=elems))
    y = data.draw(arrays(float, n, elements=elems))
    cset = SimplexCapSet(n, d)
    res = condg(u, np.zeros(n), eps, cset)
    assert cset.contains(res.point, 1e-12)
    # an uncertified point is still an eps-projection for eps = its own gap
    eps_eff = eps if res.certified else res.gap
    bound = np.linalg.norm(u - y) + np.sqrt(max(eps_eff, 0.0)) + 1e-8
    assert np.linalg.norm(res.point - cset.project(y)) <= bound
