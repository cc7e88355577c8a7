import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtasnn.mathcore import (LOG_FLOOR, SILENCE, TemporalAverage, circuit_rngs,
                             kl_divergence, neg_cross_entropy, one_hot,
                             safe_log, sample_spike, silence_prob,
                             symbol_log_prob, wta_softmax)


def test_silence_symbol_is_zero():
    assert SILENCE == 0


def test_safe_log_floors_small_arguments():
    assert safe_log(0.0) == np.log(LOG_FLOOR)
    assert safe_log(-1.0) == np.log(LOG_FLOOR)
    assert safe_log(2.0) == np.log(2.0)
    out = safe_log(np.array([0.0, 1.0]))
    assert out[0] == np.log(LOG_FLOOR)
    assert out[1] == 0.0


def test_one_hot():
    assert np.array_equal(one_hot(0, 3), [0.0, 0.0, 0.0])
    assert np.array_equal(one_hot(2, 3), [0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        one_hot(4, 3)
    with pytest.raises(ValueError):
        one_hot(-1, 3)


def test_neg_cross_entropy_known_values():
    # uniform 3-way split including silence: H(a, a) = log(1/3)
    a = np.array([1 / 3, 1 / 3])
    assert neg_cross_entropy(a, a) == pytest.approx(-1.0986122886681098, abs=1e-12)
    # deterministic spike against a half/half model
    s = np.array([1.0, 0.0])
    b = np.array([0.5, 0.25])
    assert neg_cross_entropy(s, b) == pytest.approx(np.log(0.5), abs=1e-12)


def test_neg_cross_entropy_zero_times_log_zero():
    a = np.array([1.0, 0.0])
    b = np.array([1.0, 0.0])  # both b_2 and the silence mass are zero
    assert neg_cross_entropy(a, b) == 0.0


def test_neg_cross_entropy_rejects_bad_inputs():
    with pytest.raises(ValueError):
        neg_cross_entropy(np.array([0.7, 0.7]), np.array([0.1, 0.1]))
    with pytest.raises(ValueError):
        neg_cross_entropy(np.array([-0.1, 0.5]), np.array([0.1, 0.1]))
    with pytest.raises(ValueError):
        neg_cross_entropy(np.array([0.5]), np.array([0.1, 0.1]))


@st.composite
def subdistributions(draw, size):
    raw = draw(st.lists(st.floats(0.001, 1.0), min_size=size, max_size=size))
    v = np.array(raw)
    total = draw(st.floats(0.05, 0.95))
    return v * (total / v.sum())


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(subdistributions(n), subdistributions(n))))
@settings(max_examples=100, deadline=None)
def test_kl_nonnegative_and_zero_on_self(pair):
    a, b = pair
    assert kl_divergence(a, b) >= -1e-12
    assert kl_divergence(a, a) == pytest.approx(0.0, abs=1e-12)


def test_softmax_known_values():
    # two units, zero potential: each unit and silence get 1/3
    p = wta_softmax(np.zeros(2))
    assert p == pytest.approx([1 / 3, 1 / 3], abs=1e-15)
    # single unit, zero potential: logistic value 1/2
    assert wta_softmax(np.zeros(1))[0] == pytest.approx(0.5, abs=1e-15)
    assert silence_prob(wta_softmax(np.zeros(1))) == pytest.approx(0.5, abs=1e-15)


def test_softmax_single_unit_matches_logistic():
    for u in (-30.0, -2.0, 0.3, 5.0, 30.0):
        expected = 1.0 / (1.0 + np.exp(-u))
        assert wta_softmax([u])[0] == pytest.approx(expected, rel=1e-14)


def test_softmax_extreme_potentials_stay_finite():
    p = wta_softmax(np.array([1000.0, -1000.0]))
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0, abs=1e-12)
    p = wta_softmax(np.array([-1000.0, -1000.0]))
    assert silence_prob(p) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        wta_softmax(np.array([np.nan]))


@given(st.lists(st.floats(-30, 30), min_size=1, max_size=5))
@settings(max_examples=200, deadline=None)
def test_softmax_is_a_distribution(u):
    p = wta_softmax(np.array(u))
    assert np.all(p >= 0)
    assert np.all(p <= 1)
    total = p.sum() + np.exp(-np.logaddexp.reduce(np.append(u, 0.0)))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_symbol_log_prob():
    p = np.array([0.2, 0.5])
    assert symbol_log_prob(1, p) == pytest.approx(np.log(0.2), abs=1e-15)
    assert symbol_log_prob(SILENCE, p) == pytest.approx(np.log(0.3), abs=1e-12)
    # saturated distribution: silence mass underflows to the guarded floor
    assert symbol_log_prob(SILENCE, np.array([1.0])) == np.log(LOG_FLOOR)


class _FixedRng:
    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_sample_spike_partitions_the_unit_interval():
    p = np.array([0.2, 0.5])
    assert sample_spike(p, _FixedRng(0.1)) == 1
    assert sample_spike(p, _FixedRng(0.3)) == 2
    assert sample_spike(p, _FixedRng(0.69)) == 2
    assert sample_spike(p, _FixedRng(0.71)) == SILENCE


def test_sample_spike_empirical_frequencies():
    p = np.array([0.3, 0.1])
    rng = np.random.default_rng(0)
    draws = np.array([sample_spike(p, rng) for _ in range(20000)])
    assert np.mean(draws == 1) == pytest.approx(0.3, abs=0.02)
    assert np.mean(draws == 2) == pytest.approx(0.1, abs=0.02)
    assert np.mean(draws == SILENCE) == pytest.approx(0.6, abs=0.02)


def test_temporal_average_matches_closed_form():
    avg = TemporalAverage(decay=0.5)
    inputs = [1.0, 2.0, 4.0]
    for f in inputs:
        avg.step(f)
    expected = sum(0.5 ** (len(inputs) - 1 - j) * f for j, f in enumerate(inputs))
    assert avg.value == pytest.approx(expected, abs=1e-15)


def test_temporal_average_validates_decay():
    with pytest.raises(ValueError):
        TemporalAverage(decay=1.0)
    with pytest.raises(ValueError):
        TemporalAverage(decay=0.0)


def test_circuit_rngs_reproducible_and_stream_separated():
    a = circuit_rngs(42, 3, stream=0)
    b = circuit_rngs(42, 3, stream=0)
    c = circuit_rngs(42, 3, stream=1)
    for ra, rb, rc in zip(a, b, c):
        va, vb, vc = ra.random(), rb.random(), rc.random()
        assert va == vb
        assert va != vc
    # distinct circuits get distinct draws
    a = circuit_rngs(42, 2, stream=0)
    assert a[0].random() != a[1].random()
