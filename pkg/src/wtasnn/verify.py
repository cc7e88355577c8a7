"""Verification drivers pairing the analytic formulas with their oracles.

Used by the ``gradcheck`` CLI subcommand and by the acceptance suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .filters import FilterBank
from .learning import log_prob_gradient
from .mathcore import SILENCE, neg_cross_entropy, one_hot, wta_softmax
from .network import CircuitSpec, Network, Role, Topology
from .oracle import exact_elbo, exact_elbo_gradient, fd_gradient, mc_gradient_mean


def random_tiny_network(rng: np.random.Generator) -> Network:
    """A random network with <= 3 circuits, C <= 3, K <= 2, tau <= 3."""
    n = int(rng.integers(2, 4))
    sizes = [int(rng.integers(1, 4)) for _ in range(n)]
    roles = [Role.INPUT] + [Role.HIDDEN] * (n - 2) + [Role.VISIBLE]
    circuits = [CircuitSpec(s, r) for s, r in zip(sizes, roles)]
    edges = [(a, b) for a in range(n) for b in range(n)
             if roles[b] is not Role.INPUT and a != b and rng.random() < 0.8]
    # guarantee at least one edge into each learnable circuit
    for b in range(n):
        if roles[b] is not Role.INPUT and not any(e[1] == b for e in edges):
            edges.append((0, b))
    K = int(rng.integers(1, 3))
    tau = int(rng.integers(max(K, 1), 4))
    fb = FilterBank.build("raised_cosine", K, tau, tau3=2.0)
    seed = int(rng.integers(0, 2**31))
    return Network(Topology(circuits, edges), fb, seed=seed, init_std=0.5)


def _random_clamp(net: Network, rng: np.random.Generator, full: bool) -> Dict[int, int]:
    top = net.topology
    clamp = {}
    for i in range(top.n_circuits):
        if top.role(i) is Role.INPUT or (full and top.role(i) is not Role.INPUT):
            clamp[i] = int(rng.integers(0, top.size(i) + 1))
    return clamp


def max_gradient_rel_error(n_networks: int = 20, seed: int = 0,
                           h: float = 1e-4, flip_sign: bool = False) -> float:
    """Worst relative error of the analytic log-probability gradient against
    central finite differences of the cross-entropy, over random networks
    and random spike histories.

    ``flip_sign`` negates the analytic gradient (mutation hook for testing
    that the check actually detects a wrong formula).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_networks):
        net = random_tiny_network(rng)
        res = None
        for _ in range(4):  # populate traces with random activity
            res = net.step(_random_clamp(net, rng, full=True))
        for i in net.topology.learnable_ids():
            z = res.features[i]
            s = res.spikes[i]
            C = net.topology.size(i)
            target = one_hot(s, C)
            analytic = log_prob_gradient(s, res.probs[i], z)
            if flip_sign:
                analytic = -analytic
            fd = fd_gradient(lambda th: neg_cross_entropy(target, wta_softmax(th @ z)),
                             net.params[i].theta, h=h)
            denom = np.maximum(np.abs(fd), 1e-6)
            err = np.abs(analytic - fd) / denom
            err[(np.abs(analytic) < 1e-12) & (np.abs(fd) < 1e-12)] = 0.0
            worst = max(worst, float(err.max()))
    return worst


def fixed_tiny_network(seed: int = 7) -> Tuple[Network, np.ndarray, List[Dict[int, int]]]:
    """The fixed 1-input / 1-hidden / 1-visible C=2 network with T=2, used
    for the estimator-unbiasedness check."""
    circuits = [CircuitSpec(2, Role.INPUT), CircuitSpec(2, Role.HIDDEN),
                CircuitSpec(2, Role.VISIBLE)]
    edges = [(0, 1), (1, 2), (0, 2)]
    fb = FilterBank.build("raised_cosine", 1, 2, tau3=2.0)
    net = Network(Topology(circuits, edges), fb, seed=seed, init_std=0.5)
    input_seq = np.array([[1], [2]])
    target_seq = [{2: 1}, {2: SILENCE}]
    return net, input_seq, target_seq


@dataclass
class EstimatorCheck:
    max_sigma: float  # worst |mc - exact| / stderr over components
    max_abs_gap: float
    exact: Dict[int, np.ndarray]
    mc_mean: Dict[int, np.ndarray]
    stderr: Dict[int, np.ndarray]


def estimator_unbiasedness_check(net: Network, input_seq: np.ndarray,
                                 target_seq, n_samples: int,
                                 seed: int = 0) -> EstimatorCheck:
    """Compare the raw MC hidden-gradient mean (gamma = kappa = 1, no
    baseline, alpha = 0) against the enumeration oracle at gamma -> 1."""
    alpha, rate = 0.0, 0.3
    # gamma ~ 1: the undiscounted criterion the raw estimator targets.
    gamma = 1.0 - 1e-12
    exact = exact_elbo_gradient(net, input_seq, target_seq, alpha, rate, gamma)
    mc_mean, stderr = mc_gradient_mean(net, input_seq, target_seq, alpha, rate,
                                       n_samples, seed=seed)
    worst = 0.0
    gap = 0.0
    for i in exact:
        diff = np.abs(mc_mean[i] - exact[i])
        gap = max(gap, float(diff.max()))
        sigma = np.maximum(stderr[i], 1e-9)
        worst = max(worst, float((diff / sigma).max()))
    return EstimatorCheck(worst, gap, exact, mc_mean, stderr)
