"""Scalar and vector primitives shared across the library.

Spike symbols are plain ints: 0 means silence, c in 1..C means unit c fired.
Probability vectors carry only the C spiking masses; the silence mass is the
implicit remainder 1 - sum(p).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

SILENCE = 0

# Floor for log arguments; probabilities can saturate early in training.
LOG_FLOOR = 1e-300

_SUM_SLACK = 1e-9


def safe_log(x):
    """log with arguments clamped at LOG_FLOOR (elementwise for arrays)."""
    return np.log(np.maximum(x, LOG_FLOOR))


def one_hot(symbol: int, size: int) -> np.ndarray:
    if not 0 <= symbol <= size:
        raise ValueError(f"symbol {symbol} out of range for size {size}")
    v = np.zeros(size)
    if symbol != SILENCE:
        v[symbol - 1] = 1.0
    return v


def _check_subdistribution(v: np.ndarray, name: str) -> None:
    if np.any(v < -1e-12):
        raise ValueError(f"{name} has negative entries")
    if v.sum() > 1.0 + _SUM_SLACK:
        raise ValueError(f"{name} sums to more than 1")


def neg_cross_entropy(a, b) -> float:
    """sum_x a_x log b_x + (1 - sum a) log(1 - sum b), logs guarded."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    _check_subdistribution(a, "a")
    _check_subdistribution(b, "b")
    # 0 * log(floor) must contribute 0, so only sum where a is nonzero.
    mask = a > 0.0
    total = float(np.sum(a[mask] * safe_log(b[mask])))
    rest_a = 1.0 - a.sum()
    if rest_a > 0.0:
        total += rest_a * float(safe_log(1.0 - b.sum()))
    return total


def kl_divergence(a, b) -> float:
    return neg_cross_entropy(a, a) - neg_cross_entropy(a, b)


def wta_softmax(u) -> np.ndarray:
    """Spiking probabilities exp(u_c) / (1 + sum exp(u_c')).

    The implicit silence logit is 0 and participates in the stabilizing
    shift, hence max(0, max u).
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.isnan(u)):
        raise ValueError("NaN membrane potential")
    shift = max(0.0, float(u.max()))
    e = np.exp(u - shift)
    return e / (np.exp(-shift) + e.sum())


def silence_prob(p: np.ndarray) -> float:
    return 1.0 - float(np.sum(p))


def symbol_log_prob(symbol: int, p: np.ndarray) -> float:
    """log-probability of one spike symbol under probabilities p (guarded)."""
    if symbol == SILENCE:
        return float(safe_log(1.0 - p.sum()))
    return float(safe_log(p[symbol - 1]))


def sample_spike(p: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one symbol: unit c w.p. p_c, silence with the remaining mass."""
    u = rng.random()
    acc = 0.0
    for c, pc in enumerate(p, start=1):
        acc += pc
        if u < acc:
            return c
    return SILENCE


@dataclass
class TemporalAverage:
    """Running discounted accumulator: value <- decay * value + f."""

    decay: float
    value: Union[float, np.ndarray] = 0.0

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must lie in (0, 1), got {self.decay}")

    def step(self, f):
        self.value = self.decay * self.value + f
        return self.value


def circuit_rngs(seed: int, n: int, stream: int = 0) -> list:
    """One independent generator per circuit, reproducible from (seed, stream).

    Per-step draws happen in ascending circuit-index order; keeping one
    stream per circuit makes runs bit-reproducible regardless of which
    circuits are clamped.
    """
    return [
        np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, i)))
        for i in range(n)
    ]
