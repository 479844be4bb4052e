import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispeq.errors import ConvergenceError, InfeasibleError
from dispeq.placement import (
    PlacementProblem,
    condition_labels,
    condition_stack,
    det_phase_conditions,
    reduced_system_residuals,
    simplex_seeds,
    solve_general,
    solve_reduced,
)
from dispeq.presets import REFERENCE_TRIPLE, synthetic_three_mode, two_mode_setup
from dispeq.transfer import analytic_c1, composite_matrix


def test_reference_triple_residuals():
    r1, r2 = reduced_system_residuals(*REFERENCE_TRIPLE)
    assert abs(r1) < 2e-3 and abs(r2) < 2e-3


def test_reduced_residuals_are_c1_derivatives(setup):
    # r1 ~ c1 at fx = pi/2 - e; r2 ~ dc1/dX along the uniform stretch X -> (1+t) X
    X = np.array([1.1, 0.7, 2.9])
    e = 1e-4
    r1, r2 = reduced_system_residuals(*X)
    c1 = analytic_c1(X, math.pi / 2 - e, truncated=True)
    assert c1 == pytest.approx(2 * e * r1, rel=1e-6)
    t = 1e-6
    dc = (analytic_c1((1 + t) * X, math.pi / 2 - e, True) - analytic_c1((1 - t) * X, math.pi / 2 - e, True)) / (2 * t)
    assert dc == pytest.approx(-2 * e * r2, rel=1e-5)


def test_solve_reduced_from_reference_seed(solution):
    np.testing.assert_allclose(solution.X, REFERENCE_TRIPLE, atol=1e-5)
    assert solution.max_residual < 1e-10
    assert solution.winding == pytest.approx(20 * math.pi)
    assert solution.seed_index == -1


def test_solve_reduced_from_seeds(setup):
    sol = solve_reduced(10, setup.fi, setup.fz)
    assert sol.max_residual < 1e-10
    assert np.all(sol.X > 0)
    assert np.sum(sol.X) == pytest.approx(2 * math.pi * 10 * setup.fz / setup.fi)


def test_solve_reduced_infeasible(setup):
    with pytest.raises(InfeasibleError):
        solve_reduced(-1, setup.fi, setup.fz)
    with pytest.raises(ConvergenceError):
        solve_reduced(1e-6, setup.fi, setup.fz, seeds=4)


@given(st.floats(0.1, 50), st.integers(1, 40))
def test_simplex_seeds_on_simplex(total, count):
    s = simplex_seeds(total, count)
    assert s.shape == (count, 3)
    assert np.all(s >= 0)
    np.testing.assert_allclose(s.sum(axis=1), total, rtol=1e-12)


def test_simplex_seeds_deterministic():
    np.testing.assert_array_equal(simplex_seeds(5.0, 8), simplex_seeds(5.0, 8))


def test_condition_labels_counts():
    p = synthetic_three_mode(order=2)
    assert condition_labels(p) == ["Re d0 c1", "Im d0 c1", "Re d1 c1", "Im d1 c1"]
    s = two_mode_setup()
    p2 = PlacementProblem(s.phase, s.scatterer, s.omega0, 3)
    assert condition_labels(p2) == ["Re d0 c1", "Re d1 c1", "Re d2 c1"]


def test_condition_stack_vanishes_at_reference_solution(setup, solution):
    p = PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 3)
    rows = condition_stack(p, solution.lengths)
    assert np.max(np.abs(rows)) < 1e-7


def test_truncated_and_full_stacks_agree(setup, solution):
    full = PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 3)
    trunc = PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 3, truncated=True)
    L = solution.lengths * 1.01
    a, b = condition_stack(full, L), condition_stack(trunc, L)
    # the cos^3 terms only enter at third order in (w - w0)
    np.testing.assert_allclose(a[:2], b[:2], atol=1e-7)


def test_det_phase_conditions_length_independent(setup):
    p = PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 3)
    a = det_phase_conditions(p, [1.0, 2.0, 3.0])
    b = det_phase_conditions(p, [0.3, 5.0, 0.9])
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_general_solver_three_mode():
    p = synthetic_three_mode(order=1)
    t0 = time.perf_counter()
    sol = solve_general(p)
    assert time.perf_counter() - t0 < 60
    assert sol.max_residual < 1e-8
    assert np.all(sol.lengths > 0)
    m = composite_matrix(sol.lengths, p.scatterer, p.phase, p.omega0).matrix
    m3 = np.linalg.matrix_power(m, 3)
    lam = np.trace(m3) / 3
    assert np.linalg.norm(m3 - lam * np.eye(3)) < 1e-6
    assert abs(abs(lam) - 1) < 1e-9


def test_general_solver_thread_invariant():
    p = synthetic_three_mode(order=1)
    a = solve_general(p, threads=1)
    b = solve_general(p, threads=4)
    np.testing.assert_array_equal(a.lengths, b.lengths)


def test_general_drops_identity_rows(setup):
    # three quarter-turn scatterers: c1(omega0) vanishes for any lengths
    p = PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 1, count=3)
    sol = solve_general(p)
    assert sol.degenerate_rows == ["Re d0 c1"]


def test_problem_validation(setup):
    with pytest.raises(ValueError):
        PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 0)
    with pytest.raises(ValueError):
        PlacementProblem(setup.phase, setup.scatterer, setup.omega0, 1, count=0)
