"""The Mallows permuton mu_beta and rectangle statistics of empirical permutations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from mallows_lab.global_limit.curves import SERIES_SWITCH, F_map, _arrays, _out
from mallows_lab.perm.core import Permutation

GRID_TOLERANCE = 1e-9


def rho_density(beta, x, y, series_switch: float = SERIES_SWITCH):
    """Density of mu_beta at (x, y); identically 1 when beta = 0."""
    beta, x, y = _arrays(beta, x, y)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gap = np.exp(-beta / 4) * np.cosh(beta * (x - y) / 2) - np.exp(beta / 4) * np.cosh(beta * (x + y - 1) / 2)
        closed = (beta / 2) * np.sinh(beta / 2) / gap**2
    d = -(2 * x - 1) * (2 * y - 1) / 4
    s = ((x - y) ** 2 + (x + y - 1) ** 2) / 4
    series = 1 + 2 * beta * d + beta**2 * (3 * d**2 + 1 / 48 - s / 2)
    return _out(np.where(np.abs(beta) < series_switch, series, closed))


def rho_corner_value(beta: float) -> float:
    """rho_beta at (x, y) = (1, 0): beta (e^beta - 1) / (e^beta + e^-beta - 2)."""
    if abs(beta) < SERIES_SWITCH:
        return float(rho_density(beta, 1.0, 0.0))
    return beta * math.expm1(beta) / (2.0 * math.cosh(beta) - 2.0)


def rho_lower_bound(beta: float) -> float:
    """Smallest density value over the four corners of the unit square."""
    return float(min(rho_density(beta, cx, cy) for cx, cy in ((0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0))))


def permuton_cdf(beta, x, y):
    """mu_beta([0, x] x [0, y]) = x - F_x(y) with F taken at t = beta."""
    return _out(np.asarray(x, dtype=float) - np.asarray(F_map(x, beta, y)))


@dataclass(frozen=True)
class PermutonGrid:
    k: int
    masses: np.ndarray

    def __post_init__(self):
        if self.masses.shape != (self.k, self.k):
            raise ValueError(f"PermutonGrid masses must be {self.k}x{self.k}.")
        if np.any(self.masses < -GRID_TOLERANCE):
            raise ValueError("PermutonGrid masses must be nonnegative.")

    @classmethod
    def from_density(cls, beta: float, k: int) -> PermutonGrid:
        return cls(k=k, masses=np.diff(np.diff(_cumulative_model(float(beta), k), axis=0), axis=1))

    @classmethod
    def from_permutation(cls, p: Permutation, k: int) -> PermutonGrid:
        return cls(k=k, masses=np.diff(np.diff(_cumulative_empirical(p, k), axis=0), axis=1))

    def marginals_ok(self, tol: float = GRID_TOLERANCE) -> bool:
        target = 1.0 / self.k
        return bool(
            np.allclose(self.masses.sum(axis=1), target, atol=tol) and np.allclose(self.masses.sum(axis=0), target, atol=tol)
        )


@lru_cache(maxsize=64)
def _cumulative_model(beta: float, k: int) -> np.ndarray:
    edges = np.linspace(0.0, 1.0, k + 1)
    grid = np.asarray(permuton_cdf(beta, edges[:, None], edges[None, :]), dtype=float)
    grid.setflags(write=False)
    return grid


def _cumulative_empirical(p: Permutation, k: int) -> np.ndarray:
    """(1/n) #{i : i/n <= a/k, p(i)/n <= c/k} for a, c in 0..k, in exact integer arithmetic."""
    n = p.n
    positions = np.arange(1, n + 1)
    values = np.asarray(p.forward)
    col = (positions * k + n - 1) // n
    row = (values * k + n - 1) // n
    counts = np.zeros((k + 1, k + 1))
    np.add.at(counts, (col, row), 1.0)
    return counts.cumsum(axis=0).cumsum(axis=1) / n


@dataclass(frozen=True)
class Rect:
    a: float
    b: float
    c: float
    d: float


def delta_rect(p: Permutation, rect: Rect) -> float:
    """(1/n) #{i : i/n in [a, b], p(i)/n in [c, d]}; empty rectangles give 0."""
    if rect.b < rect.a or rect.d < rect.c:
        return 0.0
    n = p.n
    hits = sum(1 for i, v in enumerate(p.forward, start=1) if rect.a <= i / n <= rect.b and rect.c <= v / n <= rect.d)
    return hits / n


def box_discrepancy(p: Permutation, beta: float, grid_k: int = 50) -> float:
    """max |Delta_R - mu_beta(R)| over rectangles (a, b] x (c, d] with corners on the k-grid."""
    gap = _cumulative_empirical(p, grid_k) - _cumulative_model(float(beta), grid_k)
    # strips[x, c, d] = gap[x, d] - gap[x, c]; the x-range extreme is max minus min
    strips = gap[:, None, :] - gap[:, :, None]
    return float(np.ptp(strips, axis=0).max())
