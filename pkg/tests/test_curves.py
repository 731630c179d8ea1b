import numpy as np
import pytest

from mallows_lab.global_limit.curves import (
    SERIES_SWITCH,
    F_inverse,
    F_map,
    LimitCurveParams,
    lambda_rate,
    y_explicit,
    z_curve,
)


def test_z_starts_at_a():
    for a in (0.0, 0.3, 1.0):
        assert z_curve(0.4, a, 0.0) == pytest.approx(a)


def test_z_stays_in_unit_interval():
    x, a = np.meshgrid(np.linspace(0, 1, 11), np.linspace(0, 1, 11))
    for t in (-30.0, -2.0, 0.5, 8.0, 60.0):
        z = z_curve(x, a, t)
        assert np.all((z >= 0) & (z <= 1))
        assert np.all(np.isfinite(z))


def test_z_reversal_symmetry():
    x, a = 0.37, 0.62
    for t in (-3.0, -0.2, 0.4, 2.5):
        assert 1 - z_curve(x, 1 - a, -t) == pytest.approx(z_curve(x, a, t), abs=1e-12)


def test_z_is_nondecreasing_in_a():
    a = np.linspace(0, 1, 101)
    for x in (0.0, 0.3, 0.7, 1.0):
        for t in (-2.0, 1e-5, 0.5, 3.0, 5.0):
            z = z_curve(x, a, t)
            assert np.all(np.diff(z) >= -1e-12)


def test_series_branch_is_continuous_at_switch():
    for fn, args in ((z_curve, (0.3, 0.7)), (y_explicit, (0.6, 0.25)), (lambda_rate, (0.8, 0.3))):
        inside = fn(*args, SERIES_SWITCH * 0.999)
        outside = fn(*args, SERIES_SWITCH * 1.001)
        assert inside == pytest.approx(outside, abs=2e-8)


def test_z_is_continuous_in_t_through_zero():
    assert z_curve(0.2, 0.4, 1e-7) == pytest.approx(0.4, abs=1e-6)
    assert z_curve(0.2, 0.4, -1e-7) == pytest.approx(0.4, abs=1e-6)


def test_y_explicit_starts_at_strip_mass():
    assert y_explicit(0.8, 0.25, 0.0) == pytest.approx(0.8 * 0.75)


def test_y_derivative_is_lambda():
    x, a, h = 0.7, 0.4, 1e-5
    for t in (0.5, 1.5, -1.0):
        derivative = (y_explicit(x, a, t + h) - y_explicit(x, a, t - h)) / (2 * h)
        assert derivative == pytest.approx(lambda_rate(x, y_explicit(x, a, t), t), rel=1e-6)


def test_lambda_at_time_zero():
    assert lambda_rate(0.6, 0.2, 0.0) == pytest.approx(0.2 * 0.4 / 2)


def test_lambda_has_bounded_difference_quotients():
    h = 1 / 40
    x, y = np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41), indexing="ij")
    for t in np.linspace(0, 5, 11):
        lam = lambda_rate(x, y, t)
        assert np.all(np.isfinite(lam))
        assert np.max(np.abs(np.diff(lam, axis=0))) / h < 3.0
        assert np.max(np.abs(np.diff(lam, axis=1))) / h < 3.0


def test_strip_mass_of_trajectory_is_inversion_curve():
    x, a = 0.45, 0.3
    for t in (-2.0, 0.7, 3.0):
        assert F_map(x, t, z_curve(x, a, t)) == pytest.approx(y_explicit(x, a, t), abs=1e-10)


def test_F_is_decreasing_onto_zero_x():
    x, t = 0.6, 1.7
    z = np.linspace(0, 1, 51)
    values = F_map(x, t, z)
    assert values[0] == pytest.approx(x)
    assert values[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(values) < 0)


def test_F_inverse_recovers_trajectory():
    x, a, t = 0.55, 0.65, 1.2
    w = F_map(x, t, z_curve(x, a, t))
    assert F_inverse(x, t, w) == pytest.approx(z_curve(x, a, t), abs=1e-9)
    assert F_inverse(x, t, x) == 0.0
    assert F_inverse(x, t, 0.0) == 1.0


def test_F_inverse_rejects_out_of_range_mass():
    with pytest.raises(ValueError, match="w in"):
        F_inverse(0.5, 1.0, 0.7)
    with pytest.raises(ValueError, match="x in"):
        F_inverse(0.0, 1.0, 0.0)


def test_limit_curve_params_validate_range():
    assert LimitCurveParams(0.5, 0.5).at(0.0) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="x, a in"):
        LimitCurveParams(1.2, 0.5)
