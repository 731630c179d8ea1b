"""Deterministic limit objects: trajectories z_{x,a}, the fluid rate lambda, the explicit
inversion curve y and the strip-mass map F_x with its inverse.

Every function accepts scalars or numpy arrays (broadcast together) and
returns a float for scalar input. Near removable singularities a short
Taylor expansion replaces the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

SERIES_SWITCH = 1e-4
INVERSE_XTOL = 1e-12


def _out(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


def _arrays(*values):
    return np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in values))


@dataclass(frozen=True)
class LimitCurveParams:
    x: float
    a: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.a <= 1.0):
            raise ValueError(f"Limit curve needs x, a in [0, 1], got x={self.x}, a={self.a}.")

    def at(self, t):
        return z_curve(self.x, self.a, t)


def z_curve(x, a, t, series_switch: float = SERIES_SWITCH):
    """z_{x,a}(t) = (1/t) log((e^{xt}(1-a) + a e^t) / (e^{xt}(1-a) + a)), z(0) = a."""
    x, a, t = _arrays(x, a, t)
    b = 1.0 - a
    with np.errstate(divide="ignore", invalid="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
        num = np.logaddexp(x * t + log_b, t + log_a)
        den = np.logaddexp(x * t + log_b, log_a)
        closed = (num - den) / t
    c1 = a * b * (0.5 - x)
    c2 = a / 6 - a * b * x / 2 - a * b * x**2 / 2 + a * b**2 * x**2 - a**2 / 2 + a**2 * b * x + a**3 / 3
    series = a + c1 * t + c2 * t**2
    return _out(np.clip(np.where(np.abs(t) < series_switch, series, closed), 0.0, 1.0))


def _phi(u: np.ndarray) -> np.ndarray:
    """u / (1 - e^{-u}) with phi(0) = 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = u / -np.expm1(-u)
    return np.where(np.abs(u) < 1e-8, 1.0 + u / 2 + u**2 / 12, closed)


def lambda_rate(x, y, t, series_switch: float = SERIES_SWITCH):
    """lambda_x(y, t) = (1/t)(-y + x e^{tx}(1 - e^{-ty}) / (e^{tx} - 1)); lambda_x(y, 0) = y(x - y)/2."""
    x, y, t = _arrays(x, y, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (-y + _phi(t * x) * -np.expm1(-t * y) / t) / t
    series = (
        (x * y - y**2) / 2
        + t * (x**2 * y / 12 - x * y**2 / 4 + y**3 / 6)
        + t**2 * (-(y**4) / 24 + x * y**3 / 12 - x**2 * y**2 / 24)
    )
    return _out(np.where(np.abs(t) < series_switch, series, closed))


def y_explicit(x, a, t, series_switch: float = SERIES_SWITCH):
    """y(t) = (1/t) log(a + (1-a) e^{tx}), the solution of y' = lambda_x(y, t) with y(0) = x(1-a)."""
    x, a, t = _arrays(x, a, t)
    b = 1.0 - a
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.log1p(b * np.expm1(t * x)) / t
    series = b * x + b * (1 - b) * x**2 * t / 2 + x**3 * (b / 6 - b**2 / 2 + b**3 / 3) * t**2
    return _out(np.where(np.abs(t) < series_switch, series, closed))


def F_map(x, t, z, series_switch: float = SERIES_SWITCH):
    """F_x(z): mass of [0, x] x [z, 1] under the permuton density with beta = t."""
    x, t, z = _arrays(x, t, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        denominator = np.expm1(x * t) * np.expm1(z * t) + np.expm1(t)
        closed = (x * t + np.log(np.expm1(t) / denominator)) / t
    first = x * z * (1 - x) * (1 - z) / 2
    second = (
        x * z * (x**2 / 6 + z**2 / 6 + x * z / 4)
        - x * z * (x + z) / 4
        + x * z / 12
        - x**2 * z**2 * (x + z - 1) / 2
        + x**3 * z**3 / 3
    )
    series = x * (1 - z) + first * t - second * t**2
    return _out(np.clip(np.where(np.abs(t) < series_switch, series, closed), 0.0, x))


def F_inverse(x: float, t: float, w: float, xtol: float = INVERSE_XTOL) -> float:
    """The z in [0, 1] with F_x(z) = w, by bisection (F_x is strictly decreasing)."""
    if not 0.0 < x <= 1.0:
        raise ValueError(f"F_inverse needs x in (0, 1], got {x}.")
    if not -xtol <= w <= x + xtol:
        raise ValueError(f"F_inverse needs w in [0, {x}], got {w}.")
    if w >= x:
        return 0.0
    if w <= 0.0:
        return 1.0
    return float(optimize.bisect(lambda z: F_map(x, t, z) - w, 0.0, 1.0, xtol=xtol))
