import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtasnn.filters import (FilterBank, TraceBuffer, make_exp_diff_bank,
                            make_exp_diff_filter, make_raised_cosine_bank,
                            make_somatic_filter, synaptic_trace)


def test_exp_diff_first_tap():
    taps = make_exp_diff_filter(10.0, 5.0, 4)
    assert taps[0] == pytest.approx(0.0861066649579777, abs=1e-15)
    assert taps.shape == (4,)
    # slower first constant => positive taps throughout
    assert np.all(taps > 0)


def test_exp_diff_equal_constants_warns_and_zeroes():
    with pytest.warns(UserWarning):
        taps = make_exp_diff_filter(3.0, 3.0, 5)
    assert np.all(taps == 0.0)


def test_exp_diff_validation():
    with pytest.raises(ValueError):
        make_exp_diff_filter(-1.0, 5.0, 4)
    with pytest.raises(ValueError):
        make_exp_diff_filter(10.0, 5.0, 0)


def test_somatic_first_tap():
    taps = make_somatic_filter(10.0, 3)
    assert taps[0] == pytest.approx(-0.9048374180359595, abs=1e-15)
    assert np.all(taps < 0)
    assert np.all(np.diff(taps) > 0)  # decays toward zero with lag


def test_raised_cosine_bank_geometry():
    bank = make_raised_cosine_bank(2, 10)
    assert bank.shape == (2, 10)
    assert np.all(bank >= 0)
    # bump k peaks (value exactly 1) at round(k * tau / (K + 1))
    for k in (1, 2):
        peak = round(k * 10 / 3)
        assert bank[k - 1, peak - 1] == pytest.approx(1.0, abs=1e-15)
    # peaks are staggered, so the rows differ
    assert not np.allclose(bank[0], bank[1])


def test_raised_cosine_validation():
    with pytest.raises(ValueError):
        make_raised_cosine_bank(0, 5)
    with pytest.raises(ValueError):
        make_raised_cosine_bank(6, 5)


def test_exp_diff_bank_scales_constants():
    bank = make_exp_diff_bank(2, 6, 10.0, 5.0)
    assert np.allclose(bank[0], make_exp_diff_filter(10.0, 5.0, 6))
    assert np.allclose(bank[1], make_exp_diff_filter(5.0, 2.5, 6))


def test_filter_bank_build_and_shape_checks():
    fb = FilterBank.build("raised_cosine", 3, 8, tau3=10.0)
    assert fb.n_filters == 3
    assert fb.duration == 8
    fb = FilterBank.build("exp_diff", 2, 6)
    assert fb.synaptic.shape == (2, 6)
    with pytest.raises(ValueError):
        FilterBank.build("unknown", 2, 6)
    with pytest.raises(ValueError):
        FilterBank(np.zeros((2, 6)), np.zeros(5))


def test_trace_buffer_push_order_and_overflow():
    buf = TraceBuffer(size=2, duration=3)
    buf.push(1)
    buf.push(0)
    buf.push(2)
    # row 0 newest: symbols were [2, 0, 1] from newest to oldest
    assert np.array_equal(buf.hist, [[0, 1], [0, 0], [1, 0]])
    buf.push(0)
    buf.push(0)
    buf.push(0)
    assert np.all(buf.hist == 0)  # the old spikes aged out
    with pytest.raises(ValueError):
        buf.push(3)
    with pytest.raises(ValueError):
        TraceBuffer(size=0, duration=3)


def test_trace_buffer_clear():
    buf = TraceBuffer(size=1, duration=2)
    buf.push(1)
    buf.clear()
    assert np.all(buf.hist == 0)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=12),
       st.integers(1, 4), st.integers(1, 3))
@settings(max_examples=100, deadline=None)
def test_synaptic_trace_matches_direct_convolution(symbols, tau, K):
    bank = np.arange(1.0, K * tau + 1).reshape(K, tau)  # arbitrary taps
    buf = TraceBuffer(size=2, duration=tau)
    for s in symbols:
        buf.push(s)
    trace = synaptic_trace(buf, bank)
    assert trace.shape == (K, 2)
    # direct sum over lags: tap[d-1] * one_hot(symbol at t-d)
    recent = symbols[::-1][:tau]
    for k in range(K):
        for c in (1, 2):
            expected = sum(bank[k, d] for d, s in enumerate(recent) if s == c)
            assert trace[k, c - 1] == pytest.approx(expected, abs=1e-12)
