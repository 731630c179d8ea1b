from itertools import permutations

import numpy as np
import pytest

from mallows_lab.local_limit.inversions import (
    CertFlag,
    FiniteSupportRule,
    HorizonCertificationRule,
    WindowExhausted,
    ell_hat_sequence,
    right_inversions,
    sigma_values,
)
from mallows_lab.perm.core import Permutation, left_inversion_vector, right_inversion_counts
from mallows_lab.services.streams import stream


def _ells(p: Permutation) -> dict[int, int]:
    return dict(enumerate(left_inversion_vector(p).ell, start=1))


def test_ell_hat_sequence_tracks_larger_elements():
    ells = _ells(Permutation.from_values([3, 1, 2]))
    assert ell_hat_sequence(ells, 1, 3) == [0, 0, 0]
    assert ell_hat_sequence(ells, 2, 3) == [1, 2]


def test_ell_hat_sequence_needs_every_index():
    with pytest.raises(ValueError, match="missing"):
        ell_hat_sequence({1: 0, 3: 0}, 1, 3)


def test_ell_hat_sequence_counts_larger_values_up_to_j():
    n = 6
    for values in permutations(range(1, n + 1)):
        ells = _ells(Permutation.from_values(values))
        for i in range(1, n + 1):
            expected = [sum(values[k] > values[i - 1] for k in range(j)) for j in range(i, n + 1)]
            assert ell_hat_sequence(ells, i, n) == expected


def test_ell_hat_sequence_is_monotone_under_smaller_counts():
    rng = stream(31, 0)
    size = 40
    for _ in range(300):
        upper = rng.geometric(0.35, size=size) - 1
        i1 = int(rng.integers(1, size // 2))
        upper[i1] = 0
        lower = rng.integers(0, upper + 1)
        ells_t = dict(enumerate(lower.tolist()))
        ells_T = dict(enumerate(upper.tolist()))
        i = int(rng.integers(0, i1 + 1))
        small = ell_hat_sequence(ells_t, i, size - 1)
        large = ell_hat_sequence(ells_T, i1, size - 1)
        assert all(small[j - i] >= large[j - i1] for j in range(i1, size))


def test_single_left_inversion_swaps_zero_and_one():
    ells = {k: 0 for k in range(-3, 6)}
    ells[1] = 1
    rule = FiniteSupportRule(5)
    assert right_inversions(ells, 0, rule) == (1, CertFlag.EXACT)
    assert right_inversions(ells, 1, rule) == (0, CertFlag.EXACT)
    values = sigma_values(np.array([ells[k] for k in range(-3, 6)]), -3, -3, 3, 5)
    assert values.tolist() == [-3, -2, -1, 1, 0, 2, 3]


def test_right_inversions_match_finite_counts():
    for values in permutations(range(1, 6)):
        p = Permutation.from_values(values)
        ells = _ells(p)
        expected = right_inversion_counts(p)
        for i in range(1, 6):
            assert right_inversions(ells, i, FiniteSupportRule(5)) == (expected[i - 1], CertFlag.EXACT)


def test_sigma_values_rebuild_finite_permutation():
    p = Permutation.from_values([5, 2, 7, 1, 3, 6, 4])
    ells = np.array(left_inversion_vector(p).ell)
    assert tuple(sigma_values(ells, 1, 1, 7, 7)) == p.forward


def test_sigma_values_on_an_embedded_permutation_fix_the_outside():
    p = Permutation.from_values([2, 3, 1])
    ells = np.zeros(10, dtype=np.int64)
    ells[4:7] = left_inversion_vector(p).ell
    # indices -2..7; the permutation sits on positions 2..4
    values = sigma_values(ells, -2, -2, 7, 7)
    assert values.tolist() == [-2, -1, 0, 1, 3, 4, 2, 5, 6, 7]


def test_sigma_values_evaluate_rows_independently():
    a = left_inversion_vector(Permutation.from_values([2, 1, 3])).ell
    b = left_inversion_vector(Permutation.from_values([3, 2, 1])).ell
    values = sigma_values(np.array([[a, b], [b, a]]), 1, 1, 3, 3)
    assert values.shape == (2, 2, 3)
    assert values[0, 1].tolist() == [3, 2, 1]
    assert values[1, 1].tolist() == [2, 1, 3]


def test_sigma_values_reject_short_counts():
    with pytest.raises(ValueError, match="do not cover"):
        sigma_values(np.zeros(3), 0, 0, 4, 4)


def test_horizon_rule_stops_when_residual_is_small():
    rule = HorizonCertificationRule(lambda j: 0, horizon=0.5, tol=1e-3)
    extent, flag = rule.extent(4)
    assert flag is CertFlag.EXACT
    steps = extent - 4
    assert rule.residual(steps) < 1e-3 <= rule.residual(steps - 1)


def test_horizon_rule_skips_to_first_zero():
    counts = {3: 2, 4: 1, 5: 0}
    rule = HorizonCertificationRule(lambda j: counts.get(j, 0), horizon=0.0)
    assert rule.extent(3) == (5, CertFlag.EXACT)


def test_horizon_rule_reports_truncation_at_window_cap():
    def ell(j):
        if j > 10:
            raise WindowExhausted("cap", reached=10)
        return 1

    assert HorizonCertificationRule(ell, horizon=0.9).extent(0) == (10, CertFlag.TRUNCATED)


def test_right_inversions_carry_truncation_flag():
    class Truncating:
        def extent(self, i):
            return i + 2, CertFlag.TRUNCATED

    assert right_inversions({0: 0, 1: 1, 2: 0}, 0, Truncating()) == (1, CertFlag.TRUNCATED)
