"""The online variational learning rule.

Per step: traces -> potentials -> hidden sampling -> global reward ->
log-probability gradients -> per-parameter baselines -> synchronous updates.
Visible circuits follow the plain discounted gradient of their clamped
log-likelihood; hidden circuits follow the reward-weighted eligibility
trace with an optimized per-parameter control-variate baseline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .mathcore import SILENCE, one_hot, safe_log, symbol_log_prob
from .network import Network, Role, StepResult, predict_class

BASELINE_EPS = 1e-12


@dataclass
class LearnerConfig:
    eta: Optional[float] = None  # None resolves to 0.05 / n_hidden
    gamma: float = 0.2
    kappa: float = 0.2
    kappa_b: float = 0.05
    alpha: float = 1.0
    rate: float = 0.3
    halve_lr: bool = True
    use_baseline: bool = True
    grad_clip: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma", "kappa", "kappa_b"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 <= self.rate < 1.0:
            raise ValueError("rate must lie in [0, 1)")

    def resolve_eta(self, n_hidden: int) -> float:
        if self.eta is not None:
            return self.eta
        return 0.05 / max(n_hidden, 1)


def reference_log_prob(symbol: int, rate: float, size: int) -> float:
    """log of the i.i.d. sparse reference distribution: rate/C per unit,
    1 - rate for silence."""
    if symbol == SILENCE:
        return float(safe_log(1.0 - rate))
    return float(safe_log(rate / size))


def log_prob_gradient(symbol: int, probs: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Gradient of the circuit log-probability w.r.t. its (C, D) parameters:
    outer(one_hot(s) - sigma(u), z)."""
    post = one_hot(symbol, probs.shape[0]) - probs
    return np.outer(post, features)


def reward_signal(result: StepResult, net: Network, alpha: float, rate: float) -> float:
    """Visible log-likelihood minus the per-step sparsity penalty."""
    top = net.topology
    total = 0.0
    for i in top.ids(Role.VISIBLE):
        total += symbol_log_prob(result.spikes[i], result.probs[i])
    if alpha != 0.0:
        for i in top.ids(Role.HIDDEN):
            total -= alpha * (
                symbol_log_prob(result.spikes[i], result.probs[i])
                - reference_log_prob(result.spikes[i], rate, top.size(i))
            )
    return total


class CircuitTrainState:
    """Eligibility trace, baseline accumulators, and outer accumulator for
    one circuit's parameter tensor; all reset at example boundaries."""

    def __init__(self, shape: Tuple[int, int]):
        self.e = np.zeros(shape)
        self.num = np.zeros(shape)
        self.den = np.zeros(shape)
        self.acc = np.zeros(shape)

    def reset(self) -> None:
        self.e[:] = 0.0
        self.num[:] = 0.0
        self.den[:] = 0.0
        self.acc[:] = 0.0


def baseline_step(state: CircuitTrainState, reward: float, kappa_b: float) -> np.ndarray:
    """Update the per-parameter baseline accumulators and return b.

    num <- kappa_b * num + reward * e^2; den likewise with e^2; b = num/den
    with b = 0 wherever den is below BASELINE_EPS.
    """
    e2 = state.e * state.e
    state.num = kappa_b * state.num + reward * e2
    state.den = kappa_b * state.den + e2
    return np.where(state.den > BASELINE_EPS, state.num / np.maximum(state.den, BASELINE_EPS), 0.0)


class Learner:
    """Binds a network to the training rule and holds all per-circuit state."""

    def __init__(self, net: Network, config: LearnerConfig):
        self.net = net
        self.config = config
        n_hidden = len(net.topology.ids(Role.HIDDEN))
        self.eta = config.resolve_eta(n_hidden)
        self.states: Dict[int, CircuitTrainState] = {
            i: CircuitTrainState(net.params[i].theta.shape)
            for i in net.topology.learnable_ids()
        }

    def reset_example(self) -> None:
        self.net.reset_state()
        for st in self.states.values():
            st.reset()

    def _clipped(self, g: np.ndarray) -> np.ndarray:
        c = self.config.grad_clip
        if c is not None:
            return np.clip(g, -c, c)
        return g

    def step(self, input_clamp: Dict[int, int], target_clamp: Dict[int, int]) -> Tuple[float, StepResult]:
        """One training step; visible circuits are clamped to the target."""
        cfg = self.config
        net = self.net
        res = net.step({**input_clamp, **target_clamp})
        reward = reward_signal(res, net, cfg.alpha, cfg.rate)
        updates: List[Tuple[int, np.ndarray]] = []
        for i in net.topology.ids(Role.VISIBLE):
            st = self.states[i]
            g = self._clipped(log_prob_gradient(res.spikes[i], res.probs[i], res.features[i]))
            st.acc = cfg.gamma * st.acc + g
            updates.append((i, self.eta * st.acc))
        for i in net.topology.ids(Role.HIDDEN):
            st = self.states[i]
            g = self._clipped(log_prob_gradient(res.spikes[i], res.probs[i], res.features[i]))
            st.e = cfg.kappa * st.e + g
            b = baseline_step(st, reward, cfg.kappa_b) if cfg.use_baseline else 0.0
            st.acc = cfg.gamma * st.acc + (reward - b) * st.e
            updates.append((i, self.eta * st.acc))
        # Synchronous application: all deltas computed before any is applied.
        for i, delta in updates:
            net.params[i].theta += delta
        return reward, res


def _target_clamp(net: Network, label: int) -> Dict[int, int]:
    """Clamp the label's read-out circuit to unit 1 each step, others silent."""
    visible = net.topology.ids(Role.VISIBLE)
    if not 0 <= label < len(visible):
        raise ValueError(f"label {label} out of range for {len(visible)} outputs")
    return {v: (1 if n == label else SILENCE) for n, v in enumerate(visible)}


def _input_clamp(net: Network, symbols: np.ndarray) -> Dict[int, int]:
    inputs = net.topology.ids(Role.INPUT)
    if symbols.shape[0] != len(inputs):
        raise ValueError("input sequence width does not match input circuits")
    return {i: int(symbols[n]) for n, i in enumerate(inputs)}


@dataclass
class EpochMetrics:
    mean_reward: float
    hidden_rate: float
    n_examples: int


def train_example(learner: Learner, symbols: np.ndarray, label: int) -> Tuple[float, float]:
    """Train on one (T, n_inputs) symbol array; returns (mean reward,
    hidden spike rate).  All per-example state is reset first."""
    learner.reset_example()
    net = learner.net
    hidden = net.topology.ids(Role.HIDDEN)
    targets = _target_clamp(net, label)
    total = 0.0
    hidden_spikes = 0
    T = symbols.shape[0]
    for t in range(T):
        reward, res = learner.step(_input_clamp(net, symbols[t]), targets)
        total += reward
        hidden_spikes += sum(res.spikes[i] != SILENCE for i in hidden)
    rate = hidden_spikes / (T * len(hidden)) if hidden else 0.0
    return total / T, rate


def train_epoch(learner: Learner, examples: Sequence[Tuple[np.ndarray, int]],
                callback=None) -> EpochMetrics:
    """One pass over the dataset in the given order."""
    if not examples:
        raise ValueError("empty dataset")
    rewards = []
    rates = []
    for idx, (symbols, label) in enumerate(examples):
        r, h = train_example(learner, symbols, label)
        rewards.append(r)
        rates.append(h)
        if callback is not None:
            callback(idx, r, h)
    return EpochMetrics(float(np.mean(rewards)), float(np.mean(rates)), len(examples))


def classify_example(net: Network, symbols: np.ndarray, seed: int) -> int:
    """Free-run the network on one example and count read-out spikes."""
    net.reset_state()
    net.reseed(seed)
    visible = net.topology.ids(Role.VISIBLE)
    counts = np.zeros(len(visible))
    for t in range(symbols.shape[0]):
        res = net.step(_input_clamp(net, symbols[t]), sample_visible=True)
        for n, v in enumerate(visible):
            if res.spikes[v] != SILENCE:
                counts[n] += 1
    return predict_class(counts)


def evaluate(net: Network, examples: Sequence[Tuple[np.ndarray, int]],
             seed: int = 0) -> Tuple[float, np.ndarray]:
    """Accuracy and per-class correct counts on a labelled dataset."""
    if not examples:
        raise ValueError("empty dataset")
    n_classes = len(net.topology.ids(Role.VISIBLE))
    per_class = np.zeros((n_classes, 2))  # correct, total
    correct = 0
    for idx, (symbols, label) in enumerate(examples):
        pred = classify_example(net, symbols, seed=seed * 1_000_003 + idx)
        per_class[label, 1] += 1
        if pred == label:
            correct += 1
            per_class[label, 0] += 1
    return correct / len(examples), per_class
