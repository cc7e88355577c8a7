"""Probabilistic winner-take-all spiking networks with online local
variational learning."""

from .filters import FilterBank, TraceBuffer
from .learning import Learner, LearnerConfig, evaluate, train_epoch, train_example
from .mathcore import SILENCE, kl_divergence, neg_cross_entropy, wta_softmax
from .network import (CircuitSpec, Network, Role, StepResult, Topology,
                      build_standard_topology)

__all__ = [
    "SILENCE",
    "CircuitSpec",
    "FilterBank",
    "Learner",
    "LearnerConfig",
    "Network",
    "Role",
    "StepResult",
    "Topology",
    "TraceBuffer",
    "build_standard_topology",
    "evaluate",
    "kl_divergence",
    "neg_cross_entropy",
    "train_epoch",
    "train_example",
    "wta_softmax",
]

__version__ = "0.1.0"
