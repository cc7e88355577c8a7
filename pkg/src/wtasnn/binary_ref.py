"""Independent scalar reference trainer for networks of single-unit circuits.

Everything here is plain Python floats and loops: sigmoid spiking
probabilities, scalar traces, and the two-factor visible / three-factor
hidden updates written out parameter by parameter.  It exists as a
cross-check for the categorical engine in the C = 1 case and must not
share code with it beyond the RNG-stream helper.
"""
from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

from .mathcore import circuit_rngs

LOG_FLOOR = 1e-300


def _sigmoid(u: float) -> float:
    # Same stabilized form as the categorical softmax with one unit, so the
    # two implementations agree to rounding.
    m = max(0.0, u)
    eu = math.exp(u - m)
    return eu / (math.exp(-m) + eu)


def _safe_log(x: float) -> float:
    return math.log(max(x, LOG_FLOOR))


class ScalarBinaryTrainer:
    """Trains a binary (all C=1) network with scalar arithmetic.

    ``weights`` maps circuit id to {'bias': float, 'fb': float,
    'syn': {(pre, k): float}}; input circuits are omitted.  ``roles`` maps
    circuit id to 'input' / 'hidden' / 'visible'.
    """

    def __init__(self, n_circuits: int, pres: Sequence[Sequence[int]],
                 roles: Sequence[str], weights: Dict[int, dict],
                 syn_taps: Sequence[Sequence[float]], som_taps: Sequence[float],
                 eta: float, gamma: float, kappa: float, seed: int = 0):
        self.n = n_circuits
        self.pres = [list(p) for p in pres]
        self.roles = list(roles)
        self.w = {i: {"bias": float(d["bias"]), "fb": float(d["fb"]),
                      "syn": {k: float(v) for k, v in d["syn"].items()}}
                  for i, d in weights.items()}
        self.syn_taps = [list(map(float, row)) for row in syn_taps]
        self.som_taps = list(map(float, som_taps))
        self.tau = len(self.som_taps)
        self.K = len(self.syn_taps)
        self.eta = eta
        self.gamma = gamma
        self.kappa = kappa
        self.rngs = circuit_rngs(seed, n_circuits, stream=0)
        self.hist = [[0] * self.tau for _ in range(n_circuits)]  # index 0 newest
        self.pending = [0] * n_circuits
        # accumulators keyed like the weights
        self.acc = {i: self._zeros_like(i) for i in self.w}
        self.elig = {i: self._zeros_like(i) for i in self.w if self.roles[i] == "hidden"}

    def _zeros_like(self, i: int) -> dict:
        return {"bias": 0.0, "fb": 0.0, "syn": {k: 0.0 for k in self.w[i]["syn"]}}

    def snapshot(self) -> Dict[int, dict]:
        return {i: {"bias": d["bias"], "fb": d["fb"], "syn": dict(d["syn"])}
                for i, d in self.w.items()}

    def step(self, clamp: Dict[int, int]) -> float:
        strace = {}
        somtr = {}
        for j in range(self.n):
            for k in range(self.K):
                strace[(j, k)] = sum(self.syn_taps[k][d] * self.hist[j][d]
                                     for d in range(self.tau))
            somtr[j] = sum(self.som_taps[d] * self.hist[j][d] for d in range(self.tau))
        u = {}
        p = {}
        for i in self.w:
            tot = self.w[i]["bias"]
            for j in self.pres[i]:
                for k in range(self.K):
                    tot += self.w[i]["syn"][(j, k)] * strace[(j, k)]
            tot += self.w[i]["fb"] * somtr[i]
            u[i] = tot
            p[i] = _sigmoid(tot)
        spikes = [0] * self.n
        for i in range(self.n):
            if self.roles[i] in ("input", "visible"):
                spikes[i] = clamp[i]
            else:
                spikes[i] = 1 if self.rngs[i].random() < p[i] else 0
        reward = 0.0
        for i in self.w:
            if self.roles[i] == "visible":
                reward += _safe_log(p[i] if spikes[i] == 1 else 1.0 - p[i])
        for i in self.w:
            post = spikes[i] - p[i]
            feats = {"bias": 1.0, "fb": somtr[i]}
            syn_feats = {(j, k): strace[(j, k)]
                         for j in self.pres[i] for k in range(self.K)}
            if self.roles[i] == "visible":
                for name in ("bias", "fb"):
                    self.acc[i][name] = self.gamma * self.acc[i][name] + post * feats[name]
                    self.w[i][name] += self.eta * self.acc[i][name]
                for key, f in syn_feats.items():
                    self.acc[i]["syn"][key] = self.gamma * self.acc[i]["syn"][key] + post * f
                    self.w[i]["syn"][key] += self.eta * self.acc[i]["syn"][key]
            else:
                for name in ("bias", "fb"):
                    self.elig[i][name] = self.kappa * self.elig[i][name] + post * feats[name]
                    self.acc[i][name] = self.gamma * self.acc[i][name] + reward * self.elig[i][name]
                    self.w[i][name] += self.eta * self.acc[i][name]
                for key, f in syn_feats.items():
                    self.elig[i]["syn"][key] = self.kappa * self.elig[i]["syn"][key] + post * f
                    self.acc[i]["syn"][key] = self.gamma * self.acc[i]["syn"][key] + reward * self.elig[i]["syn"][key]
                    self.w[i]["syn"][key] += self.eta * self.acc[i]["syn"][key]
        for i in range(self.n):
            self.hist[i] = [self.pending[i]] + self.hist[i][:-1]
            self.pending[i] = spikes[i]
        return reward

    def potentials(self, clamp: Dict[int, int]) -> Dict[int, float]:
        """Membrane potentials the next step would use, without advancing."""
        out = {}
        for i in self.w:
            tot = self.w[i]["bias"]
            for j in self.pres[i]:
                for k in range(self.K):
                    tot += self.w[i]["syn"][(j, k)] * sum(
                        self.syn_taps[k][d] * self.hist[j][d] for d in range(self.tau))
            tot += self.w[i]["fb"] * sum(
                self.som_taps[d] * self.hist[i][d] for d in range(self.tau))
            out[i] = tot
        return out
