"""Network topology, membrane potentials, and synchronous stepping.

Timing convention: the trace entering the potential at step t is the filtered
history at t-1, which by the strictly-causal convolution uses spikes up to
t-2.  A spike emitted at step t' therefore first influences a membrane
potential at step t'+2.  The engine realizes this by holding each step's
spikes in a pending slot for one step before pushing them into the ring
buffers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .filters import FilterBank, TraceBuffer
from .mathcore import SILENCE, circuit_rngs, sample_spike, wta_softmax


class Role(enum.Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    VISIBLE = "visible"


@dataclass(frozen=True)
class CircuitSpec:
    size: int
    role: Role


class Topology:
    """Directed graph of WTA circuits; cycles are permitted."""

    def __init__(self, circuits: Sequence[CircuitSpec], edges: Sequence[Tuple[int, int]]):
        self.circuits = list(circuits)
        self.edges = [tuple(e) for e in edges]
        n = len(self.circuits)
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        for pre, post in self.edges:
            if not (0 <= pre < n and 0 <= post < n):
                raise ValueError(f"edge ({pre}, {post}) out of range")
            if self.circuits[post].role is Role.INPUT:
                raise ValueError("input circuits cannot have incoming edges")
        self._pres: List[List[int]] = [[] for _ in range(n)]
        for pre, post in self.edges:
            self._pres[post].append(pre)
        for p in self._pres:
            p.sort()

    @property
    def n_circuits(self) -> int:
        return len(self.circuits)

    def size(self, i: int) -> int:
        return self.circuits[i].size

    def role(self, i: int) -> Role:
        return self.circuits[i].role

    def pres(self, i: int) -> List[int]:
        return self._pres[i]

    def ids(self, role: Role) -> List[int]:
        return [i for i, c in enumerate(self.circuits) if c.role is role]

    def learnable_ids(self) -> List[int]:
        return [i for i, c in enumerate(self.circuits) if c.role is not Role.INPUT]


class CircuitParams:
    """Learnable weights of one circuit, stored as a single (C, D) matrix.

    Column layout: [bias | for each pre-synaptic circuit j ascending: K
    blocks of width C_j | somatic block of width C].  The matching feature
    vector is [1 | flattened synaptic traces | somatic trace], so the
    membrane potential is theta @ z and every log-probability gradient is
    the outer product of the post-synaptic error with z.
    """

    def __init__(self, size: int, pre_sizes: Sequence[Tuple[int, int]], n_filters: int,
                 theta: Optional[np.ndarray] = None):
        self.size = size
        self.pre_sizes = list(pre_sizes)
        self.n_filters = n_filters
        self._offsets: Dict[int, int] = {}
        off = 1
        for j, c_j in self.pre_sizes:
            self._offsets[j] = off
            off += n_filters * c_j
        self._som_offset = off
        self.n_features = off + size
        if theta is None:
            theta = np.zeros((size, self.n_features))
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (size, self.n_features):
            raise ValueError(f"theta must have shape {(size, self.n_features)}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta entries must be finite")
        self.theta = theta

    @property
    def bias(self) -> np.ndarray:
        return self.theta[:, 0]

    def w_syn(self, j: int, k: int) -> np.ndarray:
        """(C_i, C_j) weight matrix for pre-synaptic circuit j, filter k."""
        c_j = dict(self.pre_sizes)[j]
        start = self._offsets[j] + k * c_j
        return self.theta[:, start:start + c_j]

    def w_fb(self) -> np.ndarray:
        return self.theta[:, self._som_offset:]

    def feature_vector(self, syn_traces: Dict[int, np.ndarray],
                       som_trace: np.ndarray) -> np.ndarray:
        parts = [np.ones(1)]
        for j, _ in self.pre_sizes:
            parts.append(np.ravel(syn_traces[j]))
        parts.append(np.asarray(som_trace, dtype=float))
        z = np.concatenate(parts)
        if z.shape[0] != self.n_features:
            raise ValueError("trace shapes do not match parameter layout")
        return z

    def copy(self) -> "CircuitParams":
        return CircuitParams(self.size, self.pre_sizes, self.n_filters,
                             theta=self.theta.copy())


def membrane_potential(params: CircuitParams, syn_traces: Dict[int, np.ndarray],
                       som_trace: np.ndarray) -> np.ndarray:
    """u = sum_j sum_k W_syn[j][k] @ trace_j^k + W_fb @ own_trace + bias."""
    return params.theta @ params.feature_vector(syn_traces, som_trace)


@dataclass
class StepResult:
    spikes: List[int]
    potentials: Dict[int, np.ndarray]
    probs: Dict[int, np.ndarray]
    features: Dict[int, np.ndarray]


class Network:
    """A WTA-SNN with per-circuit ring buffers and RNG streams."""

    def __init__(self, topology: Topology, filters: FilterBank, seed: int = 0,
                 init_std: float = 0.1, init_hidden_bias: float = 0.0,
                 params: Optional[List[Optional[CircuitParams]]] = None):
        self.topology = topology
        self.filters = filters
        self.seed = seed
        n = topology.n_circuits
        if params is None:
            params = self._init_params(seed, init_std, init_hidden_bias)
        self.params = params
        self.buffers = [TraceBuffer(topology.size(i), filters.duration) for i in range(n)]
        self.pending = [SILENCE] * n
        self.t = 0
        self.rngs = circuit_rngs(seed, n, stream=0)

    def _init_params(self, seed, std, hidden_bias):
        top = self.topology
        init_rngs = circuit_rngs(seed, top.n_circuits, stream=1)
        out: List[Optional[CircuitParams]] = []
        for i in range(top.n_circuits):
            if top.role(i) is Role.INPUT:
                out.append(None)
                continue
            pre_sizes = [(j, top.size(j)) for j in top.pres(i)]
            p = CircuitParams(top.size(i), pre_sizes, self.filters.n_filters)
            p.theta[:] = std * init_rngs[i].standard_normal(p.theta.shape)
            p.theta[:, 0] = hidden_bias if top.role(i) is Role.HIDDEN else 0.0
            out.append(p)
        return out

    def reset_state(self) -> None:
        for buf in self.buffers:
            buf.clear()
        self.pending = [SILENCE] * self.topology.n_circuits
        self.t = 0

    def reseed(self, seed: int) -> None:
        self.rngs = circuit_rngs(seed, self.topology.n_circuits, stream=0)

    def step(self, clamp: Dict[int, int], sample_visible: bool = False) -> StepResult:
        """Advance one time step.

        ``clamp`` must cover every INPUT circuit; any other circuit present
        in it emits the clamped symbol instead of sampling.  Unclamped
        VISIBLE circuits are sampled only when ``sample_visible`` is set
        (free-run mode).
        """
        top = self.topology
        fb = self.filters
        for i, sym in clamp.items():
            if not 0 <= sym <= top.size(i):
                raise ValueError(f"clamp symbol {sym} out of range for circuit {i}")
        syn = {}
        som = {}
        for j in range(top.n_circuits):
            hist = self.buffers[j].hist
            syn[j] = fb.synaptic @ hist
            som[j] = fb.somatic @ hist
        spikes: List[int] = [SILENCE] * top.n_circuits
        potentials: Dict[int, np.ndarray] = {}
        probs: Dict[int, np.ndarray] = {}
        features: Dict[int, np.ndarray] = {}
        for i in range(top.n_circuits):
            role = top.role(i)
            if role is Role.INPUT:
                if i not in clamp:
                    raise ValueError(f"input circuit {i} missing from clamp")
                spikes[i] = clamp[i]
                continue
            p = self.params[i]
            z = np.empty(p.n_features)
            z[0] = 1.0
            off = 1
            for j, c_j in p.pre_sizes:
                w = p.n_filters * c_j
                z[off:off + w] = syn[j].ravel()
                off += w
            z[off:] = som[i]
            u = p.theta @ z
            pr = wta_softmax(u)
            if i in clamp:
                spikes[i] = clamp[i]
            elif role is Role.HIDDEN or sample_visible:
                spikes[i] = sample_spike(pr, self.rngs[i])
            else:
                raise ValueError(f"visible circuit {i} neither clamped nor sampled")
            potentials[i] = u
            probs[i] = pr
            features[i] = z
        for i in range(top.n_circuits):
            self.buffers[i].push(self.pending[i])
            self.pending[i] = spikes[i]
        self.t += 1
        return StepResult(spikes, potentials, probs, features)


def predict_class(counts: Sequence[float]) -> int:
    """Index of the largest spike count; ties go to the lowest index."""
    counts = list(counts)
    if not counts:
        raise ValueError("empty counts")
    return int(np.argmax(counts))


def build_standard_topology(n_inputs: int, input_size: int, n_hidden: int,
                            hidden_size: int, n_outputs: int, output_size: int,
                            input_to_visible: bool = True) -> Topology:
    """Fully connected hidden circuits fed by all inputs, plus a read-out
    layer receiving the hidden circuits (and optionally the inputs)."""
    circuits = (
        [CircuitSpec(input_size, Role.INPUT)] * n_inputs
        + [CircuitSpec(hidden_size, Role.HIDDEN)] * n_hidden
        + [CircuitSpec(output_size, Role.VISIBLE)] * n_outputs
    )
    hidden = range(n_inputs, n_inputs + n_hidden)
    visible = range(n_inputs + n_hidden, n_inputs + n_hidden + n_outputs)
    edges = []
    for h in hidden:
        edges.extend((i, h) for i in range(n_inputs))
        edges.extend((g, h) for g in hidden if g != h)
    for v in visible:
        edges.extend((h, v) for h in hidden)
        if input_to_visible:
            edges.extend((i, v) for i in range(n_inputs))
    return Topology(circuits, edges)
