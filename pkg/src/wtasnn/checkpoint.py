"""Checkpoint serialization: structured JSON with explicit array shapes.

Floats round-trip exactly through Python's shortest-repr JSON encoding, so
a reloaded network reproduces membrane potentials bit-exactly.
"""
from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .filters import FilterBank
from .network import CircuitParams, CircuitSpec, Network, Role, Topology


def _params_to_dict(p: Optional[CircuitParams]):
    if p is None:
        return None
    return {"shape": list(p.theta.shape), "data": p.theta.ravel().tolist()}


def save_checkpoint(path, net: Network, config_hash: str, epoch: int,
                    extra: Optional[dict] = None) -> None:
    top = net.topology
    doc = {
        "config_hash": config_hash,
        "epoch": epoch,
        "seed": net.seed,
        "topology": {
            "circuits": [[c.size, c.role.value] for c in top.circuits],
            "edges": [list(e) for e in top.edges],
        },
        "filters": {
            "synaptic": net.filters.synaptic.tolist(),
            "somatic": net.filters.somatic.tolist(),
        },
        "params": [_params_to_dict(p) for p in net.params],
        "rng": [rng.bit_generator.state for rng in net.rngs],
        "extra": extra or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> tuple:
    """Returns (network, doc).  The network's buffers start cleared; the
    RNG streams are restored to their saved states."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    circuits = [CircuitSpec(size, Role(role)) for size, role in doc["topology"]["circuits"]]
    top = Topology(circuits, [tuple(e) for e in doc["topology"]["edges"]])
    fb = FilterBank(np.array(doc["filters"]["synaptic"]), np.array(doc["filters"]["somatic"]))
    params = []
    for i, pd in enumerate(doc["params"]):
        if pd is None:
            params.append(None)
            continue
        shape = tuple(pd["shape"])
        theta = np.array(pd["data"]).reshape(shape)
        pre_sizes = [(j, top.size(j)) for j in top.pres(i)]
        params.append(CircuitParams(top.size(i), pre_sizes, fb.n_filters, theta=theta))
    net = Network(top, fb, seed=doc["seed"], params=params)
    for rng, state in zip(net.rngs, doc["rng"]):
        rng.bit_generator.state = state
    return net, doc
