import numpy as np
import pytest

from wtasnn.filters import FilterBank
from wtasnn.mathcore import SILENCE
from wtasnn.network import CircuitSpec, Network, Role, Topology
from wtasnn.oracle import (MAX_SEQUENCES, enumerate_hidden_sequences,
                           exact_elbo, exact_elbo_gradient, fd_gradient,
                           mc_gradient_mean, run_clamped_episode)
from wtasnn.verify import fixed_tiny_network, max_gradient_rel_error


def test_fd_gradient_on_quadratic():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])

    def loss(x):
        return 0.5 * float(x @ A @ x)

    x0 = np.array([1.0, -2.0])
    g = fd_gradient(loss, x0)
    assert np.allclose(g, A @ x0, atol=1e-6)
    with pytest.raises(ValueError):
        fd_gradient(loss, x0, h=0.0)


def test_fd_gradient_perturbs_copies():
    x0 = np.array([1.0, 2.0])
    seen = []

    def loss(x):
        seen.append(x.copy())
        return float(x.sum())

    fd_gradient(loss, x0)
    assert np.array_equal(x0, [1.0, 2.0])  # input untouched
    assert all(not np.array_equal(s, x0) for s in seen)


def test_enumeration_counts_and_bound():
    net, _, _ = fixed_tiny_network()
    seqs = list(enumerate_hidden_sequences(net, T=2))
    assert len(seqs) == 9  # (C + 1)^T for one C=2 hidden circuit
    assert seqs[0] == [{1: 0}, {1: 0}]
    assert seqs[-1] == [{1: 2}, {1: 2}]
    with pytest.raises(ValueError):
        list(enumerate_hidden_sequences(net, T=11))  # 3^11 > bound
    assert MAX_SEQUENCES == 100_000


def test_enumerated_mass_is_one():
    net, inp, tgt = fixed_tiny_network()
    _, mass = exact_elbo(net, inp, tgt, alpha=0.0, rate=0.3, gamma=0.9)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_clamped_episode_log_prob_consistency():
    net, inp, tgt = fixed_tiny_network()
    logq, rewards = run_clamped_episode(net, inp, tgt, [{1: 1}, {1: SILENCE}],
                                        alpha=0.0, rate=0.3)
    assert len(rewards) == 2
    assert logq < 0.0


def test_exact_elbo_gradient_restores_parameters():
    net, inp, tgt = fixed_tiny_network()
    before = net.params[1].theta.copy()
    exact_elbo_gradient(net, inp, tgt, alpha=0.0, rate=0.3, gamma=0.9)
    assert np.array_equal(net.params[1].theta, before)


def test_gradient_check_detects_sign_mutation():
    assert max_gradient_rel_error(n_networks=5, seed=0) < 1e-5
    assert max_gradient_rel_error(n_networks=5, seed=0, flip_sign=True) > 1e-2


def test_mc_mean_matches_exact_gradient_with_lagged_influence():
    """Four steps, so early hidden spikes do shape later rewards; the exact
    gradient is nonzero and the sampled estimator must agree."""
    circuits = [CircuitSpec(2, Role.INPUT), CircuitSpec(2, Role.HIDDEN),
                CircuitSpec(2, Role.VISIBLE)]
    fb = FilterBank.build("raised_cosine", 1, 2, tau3=2.0)
    net = Network(Topology(circuits, [(0, 1), (1, 2), (0, 2)]), fb, seed=7,
                  init_std=0.5)
    inp = np.array([[1], [2], [0], [1]])
    tgt = [{2: 1}, {2: SILENCE}, {2: 2}, {2: 1}]
    gamma = 1.0 - 1e-12
    exact = exact_elbo_gradient(net, inp, tgt, alpha=0.0, rate=0.3, gamma=gamma)
    assert np.max(np.abs(exact[1])) > 1e-3
    mean, se = mc_gradient_mean(net, inp, tgt, alpha=0.0, rate=0.3,
                                n_samples=20000, seed=3)
    sigma = np.abs(mean[1] - exact[1]) / np.maximum(se[1], 1e-9)
    assert sigma.max() < 3.0


def test_mc_mean_requires_samples():
    net, inp, tgt = fixed_tiny_network()
    with pytest.raises(ValueError):
        mc_gradient_mean(net, inp, tgt, 0.0, 0.3, n_samples=1)
