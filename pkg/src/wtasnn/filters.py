"""Temporal kernels and ring-buffered spike traces.

Tap arrays are indexed by lag: taps[0] corresponds to delta = 1 (the most
recent strictly-past spike), taps[tau - 1] to delta = tau.  All kernels in a
bank share one duration tau, so each circuit needs a single ring buffer.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mathcore import SILENCE


def make_exp_diff_filter(tau1: float, tau2: float, tau: int) -> np.ndarray:
    """taps[d] = exp(-delta/tau1) - exp(-delta/tau2) for delta = 1..tau."""
    if tau1 <= 0 or tau2 <= 0:
        raise ValueError("time constants must be positive")
    if tau < 1:
        raise ValueError("duration must be >= 1")
    if tau1 == tau2:
        warnings.warn("tau1 == tau2 yields an all-zero filter", stacklevel=2)
    delta = np.arange(1, tau + 1, dtype=float)
    return np.exp(-delta / tau1) - np.exp(-delta / tau2)


def make_somatic_filter(tau3: float, tau: int) -> np.ndarray:
    """Negative-feedback kernel -exp(-delta/tau3), modelling refractoriness."""
    if tau3 <= 0:
        raise ValueError("time constant must be positive")
    if tau < 1:
        raise ValueError("duration must be >= 1")
    delta = np.arange(1, tau + 1, dtype=float)
    return -np.exp(-delta / tau3)


def make_raised_cosine_bank(n_filters: int, tau: int) -> np.ndarray:
    """K nonnegative cosine bumps with peaks staggered over 1..tau.

    Bump k peaks at round(k * tau / (K + 1)) with half-width tau / (K + 1);
    taps are 0.5 * (1 + cos(pi * (delta - peak) / width)) on the support and
    zero elsewhere.
    """
    if n_filters < 1:
        raise ValueError("need at least one filter")
    if tau < n_filters:
        raise ValueError("duration must be >= number of filters")
    width = tau / (n_filters + 1)
    delta = np.arange(1, tau + 1, dtype=float)
    bank = np.zeros((n_filters, tau))
    for k in range(1, n_filters + 1):
        peak = round(k * tau / (n_filters + 1))
        arg = (delta - peak) / width
        support = np.abs(arg) <= 1.0
        bank[k - 1, support] = 0.5 * (1.0 + np.cos(np.pi * arg[support]))
    return bank


def make_exp_diff_bank(n_filters: int, tau: int, tau1: float, tau2: float) -> np.ndarray:
    """K exp-diff kernels with constants tau1/k, tau2/k (faster for higher k)."""
    return np.stack(
        [make_exp_diff_filter(tau1 / k, tau2 / k, tau) for k in range(1, n_filters + 1)]
    )


@dataclass
class FilterBank:
    """K synaptic kernels plus one somatic kernel, all of duration tau."""

    synaptic: np.ndarray  # (K, tau)
    somatic: np.ndarray  # (tau,)

    def __post_init__(self):
        self.synaptic = np.atleast_2d(np.asarray(self.synaptic, dtype=float))
        self.somatic = np.asarray(self.somatic, dtype=float)
        if self.somatic.ndim != 1 or self.synaptic.shape[1] != self.somatic.shape[0]:
            raise ValueError("synaptic and somatic filters must share one duration")

    @property
    def n_filters(self) -> int:
        return self.synaptic.shape[0]

    @property
    def duration(self) -> int:
        return self.synaptic.shape[1]

    @classmethod
    def build(cls, kind: str, n_filters: int, tau: int,
              tau1: float = 10.0, tau2: float = 5.0, tau3: float = 10.0) -> "FilterBank":
        if kind == "raised_cosine":
            syn = make_raised_cosine_bank(n_filters, tau)
        elif kind == "exp_diff":
            syn = make_exp_diff_bank(n_filters, tau, tau1, tau2)
        else:
            raise ValueError(f"unknown filter kind {kind!r}")
        return cls(synaptic=syn, somatic=make_somatic_filter(tau3, tau))


class TraceBuffer:
    """Ring buffer of the last tau spike symbols of one circuit, one-hot.

    Row 0 of ``hist`` is the most recent entry (delta = 1).  Spikes older
    than tau steps are overwritten and can no longer influence any trace.
    """

    def __init__(self, size: int, duration: int):
        if size < 1 or duration < 1:
            raise ValueError("size and duration must be >= 1")
        self.size = size
        self.duration = duration
        self.hist = np.zeros((duration, size))

    def clear(self) -> None:
        self.hist[:] = 0.0

    def push(self, symbol: int) -> None:
        if not 0 <= symbol <= self.size:
            raise ValueError(f"symbol {symbol} out of range for size {self.size}")
        self.hist[1:] = self.hist[:-1]
        self.hist[0] = 0.0
        if symbol != SILENCE:
            self.hist[0, symbol - 1] = 1.0


def synaptic_trace(buf: TraceBuffer, taps: np.ndarray) -> np.ndarray:
    """Filtered trace sum_{delta=1}^{tau} taps[delta] * s_{t-delta}.

    ``taps`` may be a single (tau,) kernel, giving a (C,) trace, or a
    (K, tau) bank, giving (K, C).
    """
    return taps @ buf.hist


def somatic_trace(buf: TraceBuffer, taps: np.ndarray) -> np.ndarray:
    """Self-memory trace; same kernel machinery applied to own history."""
    return taps @ buf.hist
