import numpy as np
import pytest

from mallows_lab.global_limit.curves import y_explicit
from mallows_lab.global_limit.ode import ode_solve


def test_runge_kutta_matches_closed_form():
    x, a, T = 0.7, 0.35, 2.0
    solution = ode_solve(x, x * (1 - a), (0.0, T), step=1e-3)
    for t in (0.5, 1.0, 2.0):
        assert solution.at(t) == pytest.approx(y_explicit(x, a, t), abs=1e-6)


def test_backward_integration_matches_closed_form():
    x, a = 0.4, 0.8
    solution = ode_solve(x, x * (1 - a), (0.0, -1.5), step=1e-3)
    assert solution.times[-1] == -1.5
    assert solution.at(-1.5) == pytest.approx(y_explicit(x, a, -1.5), abs=1e-6)


def test_vectorised_initial_conditions():
    x = np.array([0.2, 0.5, 0.9])
    a = np.array([0.1, 0.5, 0.9])
    solution = ode_solve(x, x * (1 - a), (0.0, 1.0), step=1e-2)
    assert solution.values.shape == (101, 3)
    assert solution.at(1.0) == pytest.approx(y_explicit(x, a, 1.0), abs=1e-6)


def test_solution_stays_in_invariant_region():
    solution = ode_solve(1.0, 1.0, (0.0, 5.0), step=0.05)
    assert np.all((solution.values >= 0) & (solution.values <= 1.0))


def test_interior_start_stays_strictly_inside():
    for x in (0.3, 0.6, 1.0):
        for fraction in (0.05, 0.5, 0.95):
            solution = ode_solve(x, fraction * x, (0.0, 5.0), step=0.01)
            assert np.all((solution.values > 0) & (solution.values < x))


def test_empty_span_returns_initial_value():
    solution = ode_solve(0.5, 0.1, (1.0, 1.0), step=0.1)
    assert solution.at(1.0) == pytest.approx(0.1)


def test_invalid_arguments_are_rejected():
    with pytest.raises(ValueError, match="step > 0"):
        ode_solve(0.5, 0.1, (0.0, 1.0), step=0.0)
    with pytest.raises(ValueError, match="0 <= y0 <= x"):
        ode_solve(0.5, 0.6, (0.0, 1.0), step=0.1)
