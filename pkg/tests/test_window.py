import numpy as np
import pytest

from mallows_lab.local_limit.inversions import CertFlag, WindowExhausted, sigma_values
from mallows_lab.local_limit.window import (
    TranspositionMismatch,
    ZPermutationSlice,
    ZWindow,
    _check_swap,
    jump_log,
    sigma_slice,
)


def test_window_validates_arguments():
    with pytest.raises(ValueError, match="horizon"):
        ZWindow(1, 0, 1.0, -2, 2)
    with pytest.raises(ValueError, match="lo <= hi"):
        ZWindow(1, 0, 0.5, 3, 2)
    with pytest.raises(ValueError, match="wider than"):
        ZWindow(1, 0, 0.5, 0, 100, extension_cap=50)


def test_paths_do_not_depend_on_extension_order():
    a = ZWindow(2, 5, 0.7, 0, 3)
    b = ZWindow(2, 5, 0.7, 0, 3)
    a.path(300)
    a_left = a.path(-77)
    b_left = b.path(-77)
    assert a_left == b_left
    assert a.path(300) == b.path(300)
    assert a.lo <= -77 and a.hi >= 300
    assert a.extensions >= 2


def test_replicas_draw_different_paths():
    a = ZWindow(2, 0, 0.9, 0, 63)
    b = ZWindow(2, 1, 0.9, 0, 63)
    assert [a.ell_at_horizon(i) for i in range(64)] != [b.ell_at_horizon(i) for i in range(64)]


def test_extension_beyond_cap_raises_with_reached_index():
    w = ZWindow(3, 0, 0.5, 0, 15, extension_cap=32)
    with pytest.raises(WindowExhausted) as excinfo:
        w.path(100)
    assert excinfo.value.reached == 31
    assert w.width == 32


def test_ell_matrix_left_and_right_limits():
    w = ZWindow(4, 0, 0.8, 0, 7)
    jumps = {i: w.path(i).jump_times for i in range(8)}
    i = next(i for i in range(8) if jumps[i])
    s = jumps[i][0]
    after = w.ell_matrix(0, 7, [s])[0]
    before = w.ell_matrix(0, 7, [s], before=True)[0]
    assert after[i] == before[i] + 1
    assert w.ell_at(i, s) == after[i]


def test_slice_at_time_zero_is_identity():
    w = ZWindow(5, 0, 0.6, -5, 5)
    sl = sigma_slice(w, 0.0, (-5, 5))
    assert sl.values == tuple(range(-5, 6))
    assert sl.exact


def test_slice_values_are_distinct_and_balanced():
    for replica in range(5):
        w = ZWindow(6, replica, 0.6, -5, 5)
        sl = sigma_slice(w, 0.6, (-25, 25))
        assert len(set(sl.values)) == len(sl.values)
        check = sl.balance(20)
        if check.certifiable:
            assert check.balanced


def test_slice_rejects_time_outside_horizon():
    w = ZWindow(7, 0, 0.5, 0, 3)
    with pytest.raises(ValueError, match="outside"):
        sigma_slice(w, 0.6, (0, 3))


def test_slice_relabel_and_value_bounds():
    sl = ZPermutationSlice(lo=-1, t=0.5, values=(3, -1, 0, 5), flags=(CertFlag.EXACT,) * 4)
    assert sl.relabel(-1, 1).forward == (3, 1, 2)
    assert sl.hi == 2
    with pytest.raises(ValueError, match="outside slice"):
        sl.value(3)


def test_slice_rejects_repeated_certified_values():
    with pytest.raises(ValueError, match="not distinct"):
        ZPermutationSlice(lo=0, t=0.5, values=(1, 1), flags=(CertFlag.EXACT, CertFlag.EXACT))
    truncated = ZPermutationSlice(lo=0, t=0.5, values=(1, 1), flags=(CertFlag.EXACT, CertFlag.TRUNCATED))
    assert truncated.truncated == 1
    assert not truncated.exact


def test_balance_counts_crossers():
    sl = ZPermutationSlice(lo=-2, t=0.5, values=(-2, 1, -1, 0, -3), flags=(CertFlag.EXACT,) * 5)
    check = sl.balance(0)
    assert (check.left_crossers, check.right_crossers) == (1, 2)
    assert not check.balanced
    assert not sl.balance(2).certifiable


def test_jump_log_verifies_every_jump():
    w = ZWindow(8, 0, 0.7, -4, 4)
    log = jump_log(w, (-4, 4))
    assert log.certified
    expected = sum(len(w.path(i).jump_times) for i in range(-4, 5))
    assert len(log.events) == expected
    assert all(e.partner < e.i for e in log.events)
    assert list(log.events) == sorted(log.events)


def test_jump_log_respects_shorter_horizon():
    w = ZWindow(9, 0, 0.8, 0, 5)
    log = jump_log(w, (0, 5), T=0.3)
    assert all(e.time <= 0.3 for e in log.events)
    with pytest.raises(ValueError, match="outside"):
        jump_log(w, (0, 5), T=0.9)


def test_jump_log_at_window_cap_is_uncertified(caplog):
    # window already at its cap, so the first partner search to the left of 0 is blocked
    w = ZWindow(10, 0, 0.5, 0, 63, extension_cap=64, tol=1e-3)
    assert w.certification(15)[1] is CertFlag.EXACT
    assert w.jump_events(0, 15)
    with caplog.at_level("WARNING", logger="mallows_lab.local"):
        log = jump_log(w, (0, 15))
    assert not log.certified
    assert log.events == ()
    assert "unverified at the window cap" in caplog.text


def test_certified_slice_is_unchanged_by_wider_windows():
    for replica in range(4):
        narrow = ZWindow(11, replica, 0.6, -5, 5)
        wide = ZWindow(11, replica, 0.6, -400, 600)
        before = sigma_slice(narrow, 0.6, (-5, 5))
        narrow.path(900)
        narrow.path(-300)
        after = sigma_slice(narrow, 0.6, (-5, 5))
        assert before.exact
        assert after.values == before.values
        assert sigma_slice(wide, 0.6, (-5, 5)).values == before.values


def test_certified_slice_is_unchanged_by_reading_further_right():
    w = ZWindow(12, 0, 0.7, -10, 10)
    sl = sigma_slice(w, 0.7, (-10, 10))
    extent, flag = w.certification(10)
    assert flag is CertFlag.EXACT
    for further in (extent + 25, extent + 200):
        ells = w.ell_matrix(-10, further, [0.7])[0]
        assert tuple(sigma_values(ells, -10, -10, 10, further)) == sl.values


def test_check_swap_accepts_swap_with_next_smaller_value():
    before = np.array([1, 3, 2, 4])
    after = np.array([1, 4, 2, 3])
    assert _check_swap(before, after, 0, 3) == 1


def test_check_swap_defers_when_partner_is_outside():
    before = np.array([5, 6])
    after = np.array([5, 4])
    assert _check_swap(before, after, 10, 11) is None


def test_check_swap_rejects_wrong_moves():
    with pytest.raises(TranspositionMismatch, match="changed positions"):
        _check_swap(np.array([1, 2, 3]), np.array([2, 3, 1]), 0, 2)
    with pytest.raises(TranspositionMismatch, match="skipped a value"):
        _check_swap(np.array([1, 2, 3]), np.array([3, 2, 1]), 0, 2)
    with pytest.raises(TranspositionMismatch, match="did not swap"):
        _check_swap(np.array([3, 1]), np.array([1, 3]), 0, 1)
