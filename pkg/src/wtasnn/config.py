"""Experiment configuration: dataclasses with defaults, YAML loading with
unknown-key rejection."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import yaml


def _from_dict(cls, data: dict, path: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown config keys under {path}: {sorted(unknown)}")
    return cls(**data)


@dataclass
class TopologyConfig:
    hidden: int = 16
    hidden_size: int = 2
    output_size: int = 2
    input_to_visible: bool = True

    def __post_init__(self):
        if self.hidden < 0 or self.hidden_size < 1 or self.output_size < 1:
            raise ValueError("invalid topology sizes")


@dataclass
class FilterConfig:
    kind: str = "raised_cosine"
    count: int = 8
    duration: int = 10
    tau1: float = 10.0
    tau2: float = 5.0
    tau3: float = 10.0

    def __post_init__(self):
        if self.kind not in ("raised_cosine", "exp_diff"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.count < 1 or self.duration < self.count:
            raise ValueError("need 1 <= count <= duration")


@dataclass
class LearnerFileConfig:
    eta: Optional[float] = None
    gamma: float = 0.2
    kappa: float = 0.2
    kappa_b: float = 0.05
    alpha: float = 1.0
    rate: float = 0.3
    halve_lr: bool = True
    use_baseline: bool = True
    grad_clip: Optional[float] = None


@dataclass
class DataConfig:
    train_manifest: Optional[str] = None
    test_manifest: Optional[str] = None
    period_us: int = 25000
    crop_ms: int = 2000
    encoding: str = "wta"
    width: int = 26
    height: int = 26
    pool: int = 1

    def __post_init__(self):
        if self.encoding not in ("wta", "unsigned", "per_sign"):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.period_us <= 0 or self.crop_ms <= 0:
            raise ValueError("period and crop must be positive")

    @property
    def n_steps(self) -> int:
        return (self.crop_ms * 1000) // self.period_us


@dataclass
class ExperimentConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    filters: FilterConfig = field(default_factory=FilterConfig)
    learner: LearnerFileConfig = field(default_factory=LearnerFileConfig)
    data: DataConfig = field(default_factory=DataConfig)
    seed: int = 0
    epochs: int = 1
    init_std: float = 0.1
    init_hidden_bias: float = 0.0
    trials: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data or {})
    sections = {
        "topology": TopologyConfig,
        "filters": FilterConfig,
        "learner": LearnerFileConfig,
        "data": DataConfig,
    }
    kwargs = {}
    for key, cls in sections.items():
        kwargs[key] = _from_dict(cls, data.pop(key, {}) or {}, key)
    cfg = _from_dict(ExperimentConfig, {**data, **kwargs}, "<root>")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
