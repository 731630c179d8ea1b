import numpy as np
import pytest
from scipy import integrate

from mallows_lab.global_limit.permuton import (
    PermutonGrid,
    Rect,
    box_discrepancy,
    delta_rect,
    permuton_cdf,
    rho_corner_value,
    rho_density,
    rho_lower_bound,
)
from mallows_lab.perm.core import Permutation
from mallows_lab.perm.mallows import sample_mallows
from mallows_lab.services.streams import stream


def test_density_is_uniform_at_beta_zero():
    assert rho_density(0.0, 0.3, 0.8) == pytest.approx(1.0)


def test_density_symmetries():
    beta = 2.3
    for x, y in ((0.1, 0.7), (0.45, 0.2), (0.9, 0.9)):
        assert rho_density(beta, x, y) == pytest.approx(rho_density(beta, y, x))
        assert rho_density(beta, x, y) == pytest.approx(rho_density(beta, 1 - x, 1 - y))


def test_density_has_uniform_marginals():
    for beta in (-3.0, 0.7, 4.0):
        for x in (0.2, 0.6):
            row = integrate.quad(lambda y, b=beta, p=x: rho_density(b, p, y), 0.0, 1.0)[0]
            assert row == pytest.approx(1.0, abs=1e-7)


def test_density_series_is_continuous():
    assert rho_density(0.99e-4, 0.2, 0.9) == pytest.approx(rho_density(1.01e-4, 0.2, 0.9), abs=1e-7)


def test_corner_value_and_lower_bound():
    beta = 1.5
    assert rho_corner_value(beta) == pytest.approx(rho_density(beta, 1.0, 0.0))
    assert 0 < rho_lower_bound(beta) <= rho_density(beta, 0.5, 0.5)


def test_density_is_bounded_below_by_its_corners():
    x, y = np.meshgrid(np.linspace(0, 1, 51), np.linspace(0, 1, 51))
    for beta in (0.5, 2.0, 10.0):
        bound = rho_lower_bound(beta)
        assert bound > 0
        assert np.all(rho_density(beta, x, y) >= bound * (1 - 1e-9))


def test_cdf_has_uniform_margins():
    beta = 1.8
    assert permuton_cdf(beta, 0.4, 1.0) == pytest.approx(0.4)
    assert permuton_cdf(beta, 1.0, 0.3) == pytest.approx(0.3)
    assert permuton_cdf(0.0, 0.5, 0.5) == pytest.approx(0.25)


def test_model_grid_has_uniform_marginals():
    grid = PermutonGrid.from_density(2.0, 8)
    assert grid.marginals_ok()
    assert grid.masses.sum() == pytest.approx(1.0)


def test_empirical_grid_counts_every_point():
    p = sample_mallows(40, 0.9, stream(1, 0))
    grid = PermutonGrid.from_permutation(p, 8)
    assert grid.masses.sum() == pytest.approx(1.0)
    assert grid.marginals_ok()


def test_delta_rect_on_identity():
    p = Permutation.identity(10)
    assert delta_rect(p, Rect(0.0, 0.5, 0.0, 0.5)) == pytest.approx(0.5)
    assert delta_rect(p, Rect(0.0, 0.5, 0.6, 1.0)) == 0.0
    assert delta_rect(p, Rect(0.5, 0.2, 0.0, 1.0)) == 0.0


def test_identity_is_far_from_uniform_permuton():
    assert box_discrepancy(Permutation.identity(100), 0.0, 10) == pytest.approx(0.25)


def test_large_uniform_sample_is_close_to_uniform_permuton():
    p = sample_mallows(3000, 1.0, stream(2, 0))
    assert box_discrepancy(p, 0.0, 10) < 0.06


def test_mallows_sample_is_close_to_its_permuton():
    n, beta = 3000, 3.0
    p = sample_mallows(n, np.exp(beta / n), stream(3, 0))
    assert box_discrepancy(p, beta, 10) < 0.06
    assert box_discrepancy(p, beta, 10) < box_discrepancy(p, 0.0, 10)
