"""Experiment harness: train / eval / gradcheck / synth / inspect.

Metrics CSV schema (header row exactly):
    epoch,example,mean_reward,hidden_rate,train_acc,test_acc
Rows are written every 100 examples (accuracy fields empty) and once per
epoch (example column holds the epoch's example count, accuracies filled).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import data as datamod
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, config_hash, load_config
from .filters import FilterBank
from .learning import Learner, LearnerConfig, evaluate, train_example
from .network import Network, Role, build_standard_topology

METRICS_HEADER = "epoch,example,mean_reward,hidden_rate,train_acc,test_acc"

EXIT_CONFIG = 2
EXIT_DATA = 3

DATA_ROOT_ENV = "WTASNN_DATA_ROOT"


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.is_absolute():
        root = os.environ.get(DATA_ROOT_ENV)
        if root:
            return Path(root) / p
    return p


def _load_dataset(manifest_path, dcfg):
    entries = datamod.read_manifest(_resolve(manifest_path))
    if not entries:
        raise ValueError(f"empty manifest {manifest_path}")
    examples = []
    for path, label in entries:
        seq = datamod.load_example(path, dcfg.period_us, dcfg.n_steps,
                                   dcfg.width, dcfg.height, dcfg.pool,
                                   dcfg.encoding, label)
        examples.append((seq.symbols, label))
    return examples


def _input_geometry(dcfg):
    pixels = (dcfg.width // dcfg.pool) * (dcfg.height // dcfg.pool)
    if dcfg.encoding == "wta":
        return pixels, 2
    if dcfg.encoding == "unsigned":
        return pixels, 1
    return 2 * pixels, 1


def build_network(cfg: ExperimentConfig, n_classes: int) -> Network:
    n_inputs, input_size = _input_geometry(cfg.data)
    top = build_standard_topology(n_inputs, input_size, cfg.topology.hidden,
                                  cfg.topology.hidden_size, n_classes,
                                  cfg.topology.output_size,
                                  cfg.topology.input_to_visible)
    fb = FilterBank.build(cfg.filters.kind, cfg.filters.count, cfg.filters.duration,
                          cfg.filters.tau1, cfg.filters.tau2, cfg.filters.tau3)
    return Network(top, fb, seed=cfg.seed, init_std=cfg.init_std,
                   init_hidden_bias=cfg.init_hidden_bias)


def _learner_config(cfg: ExperimentConfig) -> LearnerConfig:
    lc = cfg.learner
    return LearnerConfig(eta=lc.eta, gamma=lc.gamma, kappa=lc.kappa,
                         kappa_b=lc.kappa_b, alpha=lc.alpha, rate=lc.rate,
                         halve_lr=lc.halve_lr, use_baseline=lc.use_baseline,
                         grad_clip=lc.grad_clip)


def _print_config(cfg: ExperimentConfig) -> None:
    print("resolved configuration:")
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))


def cmd_train(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
    except (OSError, ValueError, TypeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    _print_config(cfg)
    try:
        train = _load_dataset(cfg.data.train_manifest, cfg.data)
        test = (_load_dataset(cfg.data.test_manifest, cfg.data)
                if cfg.data.test_manifest else [])
    except (OSError, ValueError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    n_classes = max(label for _, label in train) + 1
    net = build_network(cfg, n_classes)
    learner = Learner(net, _learner_config(cfg))
    print(f"learning rate: {learner.eta}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.csv"
    with open(metrics_path, "w", encoding="utf-8") as metrics:
        metrics.write(METRICS_HEADER + "\n")
        for epoch in range(cfg.epochs):
            rewards, rates = [], []
            for idx, (symbols, label) in enumerate(train):
                r, h = train_example(learner, symbols, label)
                rewards.append(r)
                rates.append(h)
                if (idx + 1) % 100 == 0:
                    metrics.write(f"{epoch},{idx + 1},{np.mean(rewards[-100:]):.6f},"
                                  f"{np.mean(rates[-100:]):.6f},,\n")
            train_acc, _ = evaluate(net, train[:200], seed=cfg.seed + 1)
            test_acc = ""
            if test:
                acc, _ = evaluate(net, test, seed=cfg.seed + 2)
                test_acc = f"{acc:.6f}"
            metrics.write(f"{epoch},{len(train)},{np.mean(rewards):.6f},"
                          f"{np.mean(rates):.6f},{train_acc:.6f},{test_acc}\n")
            print(f"epoch {epoch}: mean_reward={np.mean(rewards):.4f} "
                  f"hidden_rate={np.mean(rates):.4f} train_acc={train_acc:.4f} "
                  f"test_acc={test_acc or 'n/a'}")
            if cfg.learner.halve_lr:
                learner.eta /= 2.0
    save_checkpoint(out_dir / "checkpoint.json", net, config_hash(cfg), cfg.epochs,
                    extra={"n_classes": n_classes, "config": cfg.to_dict()})
    print(f"wrote {metrics_path} and {out_dir / 'checkpoint.json'}")
    return 0


def cmd_eval(args) -> int:
    net, doc = load_checkpoint(args.checkpoint)
    dcfg_dict = doc["extra"].get("config", {}).get("data", {})
    from .config import DataConfig
    dcfg = DataConfig(**dcfg_dict) if dcfg_dict else DataConfig()
    try:
        examples = _load_dataset(args.manifest, dcfg)
    except (OSError, ValueError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    acc, per_class = evaluate(net, examples, seed=args.seed or 0)
    print(f"accuracy: {acc:.4f} over {len(examples)} examples")
    for c in range(per_class.shape[0]):
        correct, total = per_class[c]
        if total:
            print(f"  class {c}: {correct:.0f}/{total:.0f} ({correct / total:.4f})")
    return 0


def cmd_gradcheck(args) -> int:
    from .verify import (estimator_unbiasedness_check, fixed_tiny_network,
                         max_gradient_rel_error)
    ok = True
    err = max_gradient_rel_error(n_networks=args.networks, seed=args.seed or 0)
    passed = err < 1e-5
    ok &= passed
    print(f"analytic-vs-finite-difference gradients: max rel err {err:.3e} "
          f"({'PASS' if passed else 'FAIL'}, tol 1e-5)")
    net, input_seq, target_seq = fixed_tiny_network()
    chk = estimator_unbiasedness_check(net, input_seq, target_seq,
                                       n_samples=args.samples, seed=args.seed or 0)
    passed = chk.max_sigma < 3.0
    ok &= passed
    print(f"estimator mean vs enumeration oracle: worst deviation "
          f"{chk.max_sigma:.2f} standard errors ({'PASS' if passed else 'FAIL'}, tol 3)")
    return 0 if ok else 1


def cmd_synth(args) -> int:
    meta = datamod.write_synth_dataset(
        args.out_dir, n_pixels=args.pixels, T=args.steps, n_classes=args.classes,
        seed=args.seed or 0, n_train_per_class=args.train_per_class,
        n_test_per_class=args.test_per_class, period_us=args.period_us)
    with open(Path(args.out_dir) / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    print(f"wrote synthetic dataset to {args.out_dir}: {meta}")
    return 0


def cmd_inspect(args) -> int:
    net, doc = load_checkpoint(args.checkpoint)
    top = net.topology
    print(f"checkpoint: epoch {doc['epoch']}, config hash {doc['config_hash']}")
    print(f"circuits: {top.n_circuits} "
          f"(inputs {len(top.ids(Role.INPUT))}, hidden {len(top.ids(Role.HIDDEN))}, "
          f"visible {len(top.ids(Role.VISIBLE))}); edges: {len(top.edges)}")
    print(f"filters: K={net.filters.n_filters}, tau={net.filters.duration}")
    n_params = sum(p.theta.size for p in net.params if p is not None)
    print(f"learnable parameters: {n_params}")
    for i in top.learnable_ids():
        th = net.params[i].theta
        print(f"  circuit {i} ({top.role(i).value}, C={top.size(i)}): "
              f"shape {th.shape}, |theta| mean {np.abs(th).mean():.4f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wtasnn",
                                     description="Probabilistic WTA spiking networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default="runs/latest")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a manifest")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="run the gradient/estimator oracles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--networks", type=int, default=20)
    p.add_argument("--samples", type=int, default=20000)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="materialize the synthetic polarity task")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pixels", type=int, default=16)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=20)
    p.add_argument("--period-us", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("inspect", help="dump a checkpoint summary")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_inspect)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
