"""Jump rates of the finite and limiting inversion birth processes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

SINGULARITY_EPS = 1e-6


class RateKind(str, Enum):
    FINITE = "finite"
    LIMITING = "limiting"


def _finite_closed_form(i: int, j: int, q: float) -> float:
    log_q = math.log(q)
    if log_q > 0:
        ratio = math.expm1(-(j + 1) * log_q) / math.expm1(-i * log_q)
    else:
        ratio = math.exp((i - j - 1) * log_q) * math.expm1((j + 1) * log_q) / math.expm1(i * log_q)
    return max(0.0, (j + 1 - i * ratio) / (1.0 - q))


def rate_finite(i: int, j: int, q: float, singularity_eps: float = SINGULARITY_EPS) -> float:
    """p_i(j, q): rate at which ell_i jumps from j to j + 1 at q-time ``q``.

    Zero for j >= i - 1. Inside ``|q - 1| < singularity_eps`` the value is
    interpolated linearly between p_i(j, 1) = (j+1)(i-j-1)/2 and the closed
    form at the window edge on the same side.
    """
    if i < 1 or j < 0:
        raise ValueError(f"rate_finite needs i >= 1 and j >= 0, got i={i}, j={j}.")
    if q < 0:
        raise ValueError(f"rate_finite needs q >= 0, got {q}.")
    if j >= i - 1:
        return 0.0
    if q == 0.0:
        return float(j + 1)
    if abs(q - 1.0) < singularity_eps:
        anchor = 0.5 * (j + 1) * (i - j - 1)
        if q == 1.0:
            return anchor
        edge_q = 1.0 + singularity_eps if q > 1.0 else 1.0 - singularity_eps
        edge = _finite_closed_form(i, j, edge_q)
        return anchor + (edge - anchor) * (q - 1.0) / (edge_q - 1.0)
    return _finite_closed_form(i, j, q)


def rate_limiting(j: int, t: float) -> float:
    """q(j, t) = (j + 1) / (1 - t) for 0 <= t < 1."""
    if j < 0:
        raise ValueError(f"rate_limiting needs j >= 0, got {j}.")
    if not 0.0 <= t < 1.0:
        raise ValueError(f"rate_limiting is defined for 0 <= t < 1, got t={t}.")
    return (j + 1) / (1.0 - t)


@dataclass(frozen=True)
class RateSpec:
    kind: RateKind
    horizon: float
    i: int | None = None
    singularity_eps: float = SINGULARITY_EPS

    def __post_init__(self):
        if self.kind is RateKind.FINITE and (self.i is None or self.i < 1):
            raise ValueError("Finite rates need an element index i >= 1.")
        if self.kind is RateKind.LIMITING and not 0.0 <= self.horizon < 1.0:
            raise ValueError(f"Limiting rates need a horizon in [0, 1), got {self.horizon}.")
        if self.horizon < 0:
            raise ValueError(f"Horizon must be >= 0, got {self.horizon}.")

    @classmethod
    def finite(cls, i: int, horizon: float, singularity_eps: float = SINGULARITY_EPS) -> RateSpec:
        return cls(RateKind.FINITE, horizon=horizon, i=i, singularity_eps=singularity_eps)

    @classmethod
    def limiting(cls, horizon: float) -> RateSpec:
        return cls(RateKind.LIMITING, horizon=horizon)

    @property
    def max_state(self) -> int | None:
        return self.i - 1 if self.kind is RateKind.FINITE and self.i is not None else None

    def __call__(self, j: int, t: float) -> float:
        if self.kind is RateKind.FINITE:
            return rate_finite(self.i, j, t, self.singularity_eps)  # type: ignore[arg-type]
        return rate_limiting(j, t)
