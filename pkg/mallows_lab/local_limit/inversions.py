"""Left/right inversion recursions for permutations of Z.

For a position i the sequence ell_i^(j), j >= i, counts the elements larger
than sigma(i) among positions <= j. Position j + 1 is a right inversion of i
exactly when ell_i^(j) < ell_{j+1}; otherwise ell_i^(j) grows by one.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np

LOGGER = logging.getLogger("mallows_lab.local")

CERTIFICATION_TOL = 1e-9


class CertFlag(str, Enum):
    EXACT = "exact"
    TRUNCATED = "truncated"


class WindowExhausted(LookupError):
    """A lazily extended window hit its extension cap."""

    def __init__(self, message: str, reached: int):
        super().__init__(message)
        self.reached = reached


class StopRule(Protocol):
    def extent(self, i: int) -> tuple[int, CertFlag]:
        """Last index J such that no j > J contributes to r_i."""
        ...


def ell_hat_sequence(ells: Mapping[int, int], i: int, j_max: int) -> list[int]:
    """ell_i^(i), ..., ell_i^(j_max) from the left inversion counts ``ells``."""
    missing = [k for k in range(i, j_max + 1) if k not in ells]
    if missing:
        raise ValueError(f"Left inversion counts missing for indices {missing[:10]}.")
    sequence = [ells[i]]
    for j in range(i, j_max):
        current = sequence[-1]
        sequence.append(current + 1 if current >= ells[j + 1] else current)
    return sequence


@dataclass(frozen=True)
class FiniteSupportRule:
    """All ell_j vanish beyond ``last``, as for a finite permutation embedded in Z."""

    last: int

    def extent(self, i: int) -> tuple[int, CertFlag]:
        return max(i, self.last), CertFlag.EXACT


@dataclass(frozen=True)
class HorizonCertificationRule:
    """Stop rule for limiting paths observed at any t <= horizon.

    From i, find i1 >= i with ell_{i1}(T) = 0 and follow h = ell_{i1}^(j)(T).
    Every ell_i^(j)(t) dominates h, so only j with h < ell_{j+1}(T) can still
    add a right inversion. The scan stops once the chance of any further such
    j, bounded by T^(h+1) / (1 - T), drops below ``tol``.
    """

    ell_at_horizon: Callable[[int], int]
    horizon: float
    tol: float = CERTIFICATION_TOL

    def residual(self, level: int) -> float:
        if self.horizon == 0:
            return 0.0
        return self.horizon ** (level + 1) / (1.0 - self.horizon)

    def extent(self, i: int) -> tuple[int, CertFlag]:
        try:
            j = i
            while self.ell_at_horizon(j) != 0:
                j += 1
            level = 0
            while self.residual(level) >= self.tol:
                if level >= self.ell_at_horizon(j + 1):
                    level += 1
                j += 1
        except WindowExhausted as exc:
            LOGGER.warning("Certification from index %s stopped at the window cap (index %s).", i, exc.reached)
            return exc.reached, CertFlag.TRUNCATED
        return j, CertFlag.EXACT


def right_inversions(ells: Mapping[int, int], i: int, stop_rule: StopRule) -> tuple[int, CertFlag]:
    """r_i = #{j > i : sigma(j) < sigma(i)} together with the stop rule's certification."""
    extent, flag = stop_rule.extent(i)
    level = ells[i]
    count = 0
    for j in range(i, extent):
        following = ells[j + 1]
        if level < following:
            count += 1
        else:
            level += 1
    return count, flag


def sigma_values(ells: np.ndarray, first: int, lo: int, hi: int, extent: int) -> np.ndarray:
    """sigma(i) = i + r_i - ell_i for i in lo..hi, for one or many rows of counts.

    ``ells[..., k]`` holds ell_{first + k} for indices first..extent; rows are
    independent configurations evaluated together.
    """
    ells = np.asarray(ells, dtype=np.int64)
    if lo < first or extent < hi or ells.shape[-1] < extent - first + 1:
        raise ValueError(f"Counts for {first}..{extent} do not cover {lo}..{hi}.")
    flat = ells.reshape(-1, ells.shape[-1])
    positions = np.arange(lo, hi + 1)
    level = flat[:, positions - first].copy()
    right = np.zeros_like(level)
    for j in range(lo, extent):
        active = positions <= j
        below = level < flat[:, j + 1 - first][:, None]
        right += active & below
        level += active & ~below
    values = positions + right - flat[:, positions - first]
    return values.reshape(*ells.shape[:-1], positions.size)
