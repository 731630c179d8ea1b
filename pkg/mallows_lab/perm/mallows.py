"""Exact Mallows law on S_n: weights, partition function, sampler and enumeration oracle."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from mallows_lab.perm.core import (
    InversionVector,
    Permutation,
    decode_inversion_vector,
    inv_count,
    left_inversion_vector,
)

ENUMERATION_MAX_N = 9
MASS_TOLERANCE = 1e-12


def _check_q(q: float) -> float:
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise ValueError(f"q must be a finite value >= 0, got {q}.")
    return q


def mallows_weight(p: Permutation, q: float) -> float:
    """Log of q^Inv(p); q = 0 follows 0^0 = 1."""
    q = _check_q(q)
    inversions = inv_count(p)
    if q == 0.0:
        return 0.0 if inversions == 0 else -math.inf
    return inversions * math.log(q)


def log_q_integer(i: int, q: float) -> float:
    """log(1 + q + ... + q^(i-1))."""
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return math.log(i)
    log_q = math.log(q)
    if log_q < 0:
        return math.log(-math.expm1(i * log_q)) - math.log(-math.expm1(log_q))
    # Factor q^(i-1) out so large q and i stay finite.
    return (i - 1) * log_q + math.log(-math.expm1(-i * log_q)) - math.log(-math.expm1(-log_q))


def log_normalizing_constant(n: int, q: float) -> float:
    q = _check_q(q)
    return math.fsum(log_q_integer(i, q) for i in range(1, n + 1))


def normalizing_constant(n: int, q: float) -> float:
    """Z_{n,q}; may be ``inf`` for large n, use :func:`log_normalizing_constant` there."""
    log_z = log_normalizing_constant(n, q)
    try:
        return math.exp(log_z)
    except OverflowError:
        return math.inf


def truncated_geometric_pmf(i: int, q: float) -> np.ndarray:
    """P(ell_i = j) proportional to q^j on {0..i-1}."""
    q = _check_q(q)
    if q == 0.0:
        pmf = np.zeros(i)
        pmf[0] = 1.0
        return pmf
    log_w = np.arange(i) * math.log(q)
    return np.exp(log_w - logsumexp(log_w))


def sample_truncated_geometric(i: np.ndarray, q: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of ell_i for every entry of ``i`` from uniforms ``u``.

    Works on whole arrays; q = 1 is the uniform branch and q > 1 is reflected
    through the q -> 1/q symmetry j -> i - 1 - j.
    """
    i = np.asarray(i, dtype=np.int64)
    u = np.asarray(u, dtype=float)
    q = _check_q(q)
    if q == 0.0:
        return np.zeros_like(i)
    if q == 1.0:
        return np.minimum((u * i).astype(np.int64), i - 1)
    if q > 1.0:
        return i - 1 - sample_truncated_geometric(i, 1.0 / q, u)
    log_q = math.log(q)
    # smallest j with 1 - q^(j+1) >= u (1 - q^i)
    with np.errstate(divide="ignore"):
        level = np.log1p(u * np.expm1(i * log_q)) / log_q
    draws = np.ceil(level).astype(np.int64) - 1
    return np.clip(draws, 0, i - 1)


def sample_inversion_vectors(n: int, q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent Mallows inversion vectors as rows of an int array."""
    i = np.arange(1, n + 1)
    u = rng.random((size, n))
    return sample_truncated_geometric(np.broadcast_to(i, (size, n)), q, u)


def sample_inversion_vector(n: int, q: float, rng: np.random.Generator) -> InversionVector:
    return InversionVector.of(sample_inversion_vectors(n, q, 1, rng)[0])


def sample_mallows(n: int, q: float, rng: np.random.Generator) -> Permutation:
    return decode_inversion_vector(sample_inversion_vector(n, q, rng))


@dataclass(frozen=True)
class FiniteDistribution:
    support: tuple[Permutation, ...]
    mass: tuple[float, ...]
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("Support and mass must have the same length.")
        if any(m < 0 for m in self.mass):
            raise ValueError("Masses must be nonnegative.")
        total = math.fsum(self.mass)
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"Masses sum to {total!r}, expected 1.")
        self._index.update({p: k for k, p in enumerate(self.support)})

    def mass_of(self, p: Permutation) -> float:
        k = self._index.get(p)
        return 0.0 if k is None else self.mass[k]

    def mass_by_inversion_code(self) -> np.ndarray:
        """Masses indexed by :meth:`InversionVector.code` (length n!)."""
        masses = np.zeros(len(self.support))
        for p, m in zip(self.support, self.mass, strict=True):
            masses[left_inversion_vector(p).code()] = m
        return masses


def enumerate_mallows(n: int, q: float) -> FiniteDistribution:
    if not 1 <= n <= ENUMERATION_MAX_N:
        raise ValueError(f"enumerate_mallows supports 1 <= n <= {ENUMERATION_MAX_N}, got n={n}.")
    q = _check_q(q)
    support = tuple(Permutation.from_values(values) for values in permutations(range(1, n + 1)))
    log_w = np.array([mallows_weight(p, q) for p in support])
    mass = np.exp(log_w - logsumexp(log_w))
    mass /= math.fsum(mass)
    return FiniteDistribution(support, tuple(float(m) for m in mass))


def tv_distance(dist: FiniteDistribution, counts: Mapping[Permutation, int]) -> float:
    """Half the L1 distance between ``dist`` and the empirical law of ``counts``."""
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("Empirical histogram is empty.")
    outside = sum(c for p, c in counts.items() if p not in dist._index) / total
    inside = math.fsum(abs(m - counts.get(p, 0) / total) for p, m in zip(dist.support, dist.mass, strict=True))
    return 0.5 * (inside + outside)


def tv_distance_codes(masses: np.ndarray, counts: np.ndarray) -> float:
    """TV distance when both sides are indexed by inversion-vector code."""
    total = counts.sum()
    if total <= 0:
        raise ValueError("Empirical histogram is empty.")
    return 0.5 * float(np.abs(masses - counts / total).sum())


def chi_square_pvalue(masses: np.ndarray, counts: np.ndarray) -> float:
    """Goodness-of-fit p-value over cells with positive mass."""
    keep = masses > 0
    if counts[~keep].any():
        return 0.0
    observed = counts[keep].astype(float)
    expected = masses[keep] * observed.sum()
    expected *= observed.sum() / expected.sum()
    return float(stats.chisquare(observed, expected).pvalue)


def inversion_codes(vectors: np.ndarray) -> np.ndarray:
    """Vectorised :meth:`InversionVector.code` over the rows of ``vectors``."""
    vectors = np.atleast_2d(vectors)
    codes = np.zeros(vectors.shape[0], dtype=np.int64)
    for i in range(1, vectors.shape[1] + 1):
        codes = codes * i + vectors[:, i - 1]
    return codes
