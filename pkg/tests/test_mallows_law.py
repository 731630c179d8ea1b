import math

import numpy as np
import pytest

from mallows_lab.perm.core import InversionVector, Permutation, left_inversion_vector
from mallows_lab.perm.mallows import (
    chi_square_pvalue,
    enumerate_mallows,
    inversion_codes,
    log_normalizing_constant,
    normalizing_constant,
    sample_inversion_vectors,
    sample_mallows,
    truncated_geometric_pmf,
    tv_distance,
    tv_distance_codes,
)
from mallows_lab.sampling import compare_with_oracle, static_code_counts
from mallows_lab.services.streams import stream


def test_normalizing_constant_is_product_of_q_integers():
    q = 0.6
    expected = math.prod(sum(q**j for j in range(i)) for i in range(1, 8))
    assert normalizing_constant(7, q) == pytest.approx(expected, rel=1e-12)
    assert normalizing_constant(6, 1.0) == pytest.approx(math.factorial(6))


def test_log_normalizing_constant_is_finite_for_large_q():
    assert math.isfinite(log_normalizing_constant(2000, 5.0))


def test_enumeration_matches_weights():
    q = 0.4
    dist = enumerate_mallows(4, q)
    z = normalizing_constant(4, q)
    for p, m in zip(dist.support, dist.mass, strict=True):
        assert m == pytest.approx(q ** left_inversion_vector(p).total() / z, rel=1e-10)


def test_q_zero_is_point_mass_on_identity():
    dist = enumerate_mallows(4, 0.0)
    assert dist.mass_of(Permutation.identity(4)) == pytest.approx(1.0)
    p = sample_mallows(6, 0.0, stream(1, 0))
    assert p == Permutation.identity(6)


def test_large_q_concentrates_on_reversal():
    p = sample_mallows(8, 1e9, stream(2, 0))
    assert p == Permutation.reversal(8)


def test_truncated_geometric_pmf_sums_to_one():
    for q in (0.0, 0.3, 1.0, 2.5):
        pmf = truncated_geometric_pmf(6, q)
        assert pmf.sum() == pytest.approx(1.0)
    assert truncated_geometric_pmf(4, 1.0) == pytest.approx([0.25] * 4)


def test_sampled_vectors_are_admissible():
    vectors = sample_inversion_vectors(10, 1.7, 500, stream(3, 0))
    assert (vectors >= 0).all()
    assert (vectors <= np.arange(10)).all()


def test_inversion_codes_match_scalar_code():
    vectors = sample_inversion_vectors(5, 0.8, 50, stream(4, 0))
    codes = inversion_codes(vectors)
    for row, code in zip(vectors, codes, strict=True):
        assert InversionVector.of(row).code() == code


def test_tv_distance_of_exact_histogram_is_zero():
    dist = enumerate_mallows(3, 0.5)
    counts = {p: round(m * 1_000_000) for p, m in zip(dist.support, dist.mass, strict=True)}
    assert tv_distance(dist, counts) < 1e-5


def test_tv_distance_rejects_empty_histogram():
    with pytest.raises(ValueError, match="empty"):
        tv_distance_codes(np.ones(2) / 2, np.zeros(2))


def test_enumeration_refuses_large_n():
    with pytest.raises(ValueError, match="enumerate_mallows"):
        enumerate_mallows(10, 0.5)


@pytest.mark.statistical
def test_static_sampler_matches_exact_law():
    counts = static_code_counts(5, 0.7, 60_000, seed=11)
    comparison = compare_with_oracle(5, 0.7, counts)
    assert comparison.replicas == 60_000
    assert comparison.chi2_pvalue > 1e-3
    assert comparison.tv_distance < 0.03


def test_chi_square_pvalue_is_zero_for_impossible_cells():
    masses = np.array([1.0, 0.0])
    assert chi_square_pvalue(masses, np.array([5, 1])) == 0.0
