"""Independent brute-force references: finite differences, exhaustive
enumeration of hidden sequences, and Monte Carlo estimator means.

These deliberately avoid the analytic gradient formulas used by the
learner, so they can serve as oracles for them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .learning import reward_signal
from .mathcore import symbol_log_prob
from .network import Network, Role

MAX_SEQUENCES = 100_000
FD_STEP = 1e-4


def fd_gradient(loss: Callable[[np.ndarray], float], params: np.ndarray,
                h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a scalar loss, componentwise.

    ``loss`` receives a freshly perturbed copy of ``params`` each call.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    flat = grad.ravel()
    for idx in range(params.size):
        p = params.copy()
        p.ravel()[idx] += h
        f_plus = loss(p)
        p = params.copy()
        p.ravel()[idx] -= h
        f_minus = loss(p)
        flat[idx] = (f_plus - f_minus) / (2.0 * h)
    return grad


def run_clamped_episode(net: Network, input_seq: np.ndarray,
                        target_seq: Sequence[Dict[int, int]],
                        hidden_seq: Sequence[Dict[int, int]],
                        alpha: float, rate: float) -> Tuple[float, List[float]]:
    """Run with every circuit clamped; returns (log q(h), per-step rewards)."""
    net.reset_state()
    inputs = net.topology.ids(Role.INPUT)
    hidden = net.topology.ids(Role.HIDDEN)
    logq = 0.0
    rewards: List[float] = []
    for t in range(input_seq.shape[0]):
        clamp = {i: int(input_seq[t, n]) for n, i in enumerate(inputs)}
        clamp.update(target_seq[t])
        clamp.update(hidden_seq[t])
        res = net.step(clamp)
        for i in hidden:
            logq += symbol_log_prob(hidden_seq[t][i], res.probs[i])
        rewards.append(reward_signal(res, net, alpha, rate))
    return logq, rewards


def _discounted(rewards: Sequence[float], gamma: float) -> float:
    total = 0.0
    for r in rewards:
        total = gamma * total + r
    return total


def enumerate_hidden_sequences(net: Network, T: int):
    """All hidden spike assignments over T steps, lexicographic in
    (time, circuit, symbol)."""
    hidden = net.topology.ids(Role.HIDDEN)
    per_step = [range(net.topology.size(i) + 1) for i in hidden]
    n_seq = 1
    for r in per_step:
        n_seq *= len(r)
    if n_seq ** T > MAX_SEQUENCES:
        raise ValueError(f"{n_seq ** T} hidden sequences exceed the enumerability bound")
    step_choices = list(itertools.product(*per_step))
    for seq in itertools.product(step_choices, repeat=T):
        yield [dict(zip(hidden, choice)) for choice in seq]


def exact_elbo(net: Network, input_seq: np.ndarray,
               target_seq: Sequence[Dict[int, int]], alpha: float, rate: float,
               gamma: float) -> Tuple[float, float]:
    """Exhaustively enumerate hidden sequences; returns (value, total mass).

    value = sum_h q(h) * sum_{t'} gamma^{t'} reward_{T-t'}, the discounted
    training criterion at the final step.
    """
    T = input_seq.shape[0]
    value = 0.0
    mass = 0.0
    for hidden_seq in enumerate_hidden_sequences(net, T):
        logq, rewards = run_clamped_episode(net, input_seq, target_seq, hidden_seq,
                                            alpha, rate)
        q = float(np.exp(logq))
        value += q * _discounted(rewards, gamma)
        mass += q
    return value, mass


def exact_elbo_gradient(net: Network, input_seq: np.ndarray,
                        target_seq: Sequence[Dict[int, int]], alpha: float,
                        rate: float, gamma: float,
                        h: float = FD_STEP) -> Dict[int, np.ndarray]:
    """Exact criterion gradient w.r.t. hidden parameters via central
    differences of the enumerated value; independent of the analytic
    score-function path it is used to check."""
    grads: Dict[int, np.ndarray] = {}
    for i in net.topology.ids(Role.HIDDEN):
        p = net.params[i]
        original = p.theta.copy()

        def value_at(theta_values: np.ndarray) -> float:
            p.theta[:, :] = theta_values
            v, _ = exact_elbo(net, input_seq, target_seq, alpha, rate, gamma)
            return v

        grads[i] = fd_gradient(value_at, original, h=h)
        p.theta[:, :] = original
    return grads


def mc_gradient_mean(net: Network, input_seq: np.ndarray,
                     target_seq: Sequence[Dict[int, int]], alpha: float,
                     rate: float, n_samples: int, seed: int = 0,
                     ) -> Tuple[Dict[int, np.ndarray], Dict[int, np.ndarray]]:
    """Mean and standard error of the raw hidden-parameter estimator
    (kappa = gamma = 1, no baseline) over independent sampled episodes."""
    if n_samples < 2:
        raise ValueError("need at least two samples")
    from .learning import log_prob_gradient  # local import to keep the oracle surface small

    hidden = net.topology.ids(Role.HIDDEN)
    inputs = net.topology.ids(Role.INPUT)
    sums = {i: np.zeros_like(net.params[i].theta) for i in hidden}
    sq_sums = {i: np.zeros_like(net.params[i].theta) for i in hidden}
    T = input_seq.shape[0]
    for ep in range(n_samples):
        net.reset_state()
        net.reseed(seed * 2_000_003 + ep)
        e = {i: np.zeros_like(net.params[i].theta) for i in hidden}
        acc = {i: np.zeros_like(net.params[i].theta) for i in hidden}
        for t in range(T):
            clamp = {i: int(input_seq[t, n]) for n, i in enumerate(inputs)}
            clamp.update(target_seq[t])
            res = net.step(clamp)
            reward = reward_signal(res, net, alpha, rate)
            for i in hidden:
                e[i] += log_prob_gradient(res.spikes[i], res.probs[i], res.features[i])
                acc[i] += reward * e[i]
        for i in hidden:
            sums[i] += acc[i]
            sq_sums[i] += acc[i] * acc[i]
    means = {i: sums[i] / n_samples for i in hidden}
    stderr = {}
    for i in hidden:
        var = sq_sums[i] / n_samples - means[i] ** 2
        stderr[i] = np.sqrt(np.maximum(var, 0.0) / n_samples)
    return means, stderr
