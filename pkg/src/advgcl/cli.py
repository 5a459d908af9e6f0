"""Command-line front door.

Commands: train, embed, probe, degrade, poison. Every artifact-producing
command writes a RunManifest (resolved config, seed, input digests, output
paths, tool version) next to its outputs; re-running with the same inputs
and seed reproduces the outputs byte for byte.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
failure. Failures print a single machine-parsable line on stderr of the
form ``error[<usage|data|numeric>]: <reason>``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, config_to_flat_dict, resolve_config
from .encoder import encode, load_params, save_params
from .errors import (
    ContractViolationError,
    DomainError,
    IngestionError,
    NumericError,
)
from .evaluation import accuracy, fit_probe, make_split, random_poison, vulnerability_study
from .graph import Graph, load_graph, save_graph
from .rng import RngStream
from .trainer import train


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through our exit codes instead
    def error(self, message):
        raise _UsageError(message)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path: str, command: str, inputs: dict, outputs: dict, seed: int, config: dict | None = None) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {name: {"path": p, "sha256": _sha256(p)} for name, p in inputs.items()},
        "outputs": outputs,
        "seed": seed,
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_dataset(args) -> Graph:
    try:
        return load_graph(args.edges, args.features, getattr(args, "labels", None))
    except OSError as exc:
        raise IngestionError(str(exc)) from None


def _parse_overrides(pairs) -> dict[str, str]:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_train(args) -> int:
    config = resolve_config(args.config, _parse_overrides(args.set))
    G = _load_dataset(args)
    os.makedirs(args.out_dir, exist_ok=True)
    checkpoint_path = os.path.join(args.out_dir, "checkpoint.npz")
    log_path = os.path.join(args.out_dir, "log.jsonl")

    on_epoch = None
    if args.checkpoint_every:
        def on_epoch(epoch, params, record):
            if (epoch + 1) % args.checkpoint_every == 0:
                save_params(os.path.join(args.out_dir, f"checkpoint_{epoch + 1:06d}.npz"), params)

    params, log = train(G, config, on_epoch=on_epoch)
    save_params(checkpoint_path, params)
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(log.to_jsonl())
    inputs = {"edges": args.edges, "features": args.features, "config": args.config}
    if args.labels:
        inputs["labels"] = args.labels
    inputs = {k: v for k, v in inputs.items() if v}
    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "train",
        inputs,
        {"checkpoint": checkpoint_path, "log": log_path},
        config.seed,
        config_to_flat_dict(config),
    )
    return 0


def _cmd_embed(args) -> int:
    G = _load_dataset(args)
    params = load_params(args.checkpoint)
    H, _ = encode(G.adjacency, G.features, params)
    np.savetxt(args.out, H, fmt="%.17g")
    _write_manifest(
        args.out + ".manifest.json",
        "embed",
        {"edges": args.edges, "features": args.features, "checkpoint": args.checkpoint},
        {"embedding": args.out},
        0,
    )
    return 0


def _cmd_probe(args) -> int:
    try:
        H = np.loadtxt(args.embedding, ndmin=2)
        labels = np.loadtxt(args.labels, dtype=np.int64, ndmin=1)
    except (OSError, ValueError) as exc:
        raise IngestionError(str(exc)) from None
    if H.shape[0] != labels.shape[0]:
        raise IngestionError(
            f"embedding rows ({H.shape[0]}) do not match labels ({labels.shape[0]})"
        )
    root = RngStream(args.seed)
    accs = []
    for k in range(args.splits):
        split = make_split(labels, root.child(f"split:{k}"))
        model = fit_probe(H[split.train], labels[split.train], args.lam, args.max_iter)
        accs.append(accuracy(model, H[split.test], labels[split.test]))
    metrics = {
        "splits": args.splits,
        "mean_acc": float(np.mean(accs)),
        "std_acc": float(np.std(accs)),
        "accuracies": [float(a) for a in accs],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest(
        args.out + ".manifest.json",
        "probe",
        {"embedding": args.embedding, "labels": args.labels},
        {"metrics": args.out},
        args.seed,
    )
    return 0


def _cmd_degrade(args) -> int:
    G = _load_dataset(args)
    params = load_params(args.checkpoint)
    records = vulnerability_study(
        params, G, args.p, args.steps, RngStream(args.seed).child("degrade"),
        use_projection=args.projected,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("t,mean_sim,std_sim,surviving_edge_frac,surviving_dim_frac\n")
        for r in records:
            fh.write(
                f"{r.t},{r.mean_sim!r},{r.std_sim!r},"
                f"{r.surviving_edge_frac!r},{r.surviving_dim_frac!r}\n"
            )
    _write_manifest(
        args.out + ".manifest.json",
        "degrade",
        {"edges": args.edges, "features": args.features, "checkpoint": args.checkpoint},
        {"csv": args.out},
        args.seed,
    )
    return 0


def _cmd_poison(args) -> int:
    G = _load_dataset(args)
    poisoned = random_poison(
        G,
        args.edge_flip_fraction,
        args.feat_mask_fraction,
        RngStream(args.seed).child("poison"),
        edges_only=args.edges_only,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        "edges": os.path.join(args.out_dir, "edges.txt"),
        "features": os.path.join(args.out_dir, "features.txt"),
        "labels": os.path.join(args.out_dir, "labels.txt"),
        "sidecar": os.path.join(args.out_dir, "graph.json"),
    }
    save_graph(poisoned, paths["edges"], paths["features"], paths["labels"], paths["sidecar"])
    inputs = {"edges": args.edges, "features": args.features}
    if args.labels:
        inputs["labels"] = args.labels
    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "poison",
        inputs,
        paths,
        args.seed,
    )
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_dataset_args(p, labels_required=False):
    p.add_argument("--edges", required=True, help="edge list file")
    p.add_argument("--features", required=True, help="node feature file")
    p.add_argument("--labels", required=labels_required, default=None, help="label file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="advgcl", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an embedding model")
    _add_dataset_args(p)
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="config override")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--checkpoint-every", type=int, default=0, metavar="N")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("embed", help="write node embeddings for a graph")
    _add_dataset_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("probe", help="linear-probe accuracy over random splits")
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--splits", type=int, default=20)
    p.add_argument("--lam", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("degrade", help="embedding stability under iterative degradation")
    _add_dataset_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--p", type=float, default=0.03)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--projected", action="store_true", help="measure on projected embeddings")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("poison", help="write a randomly poisoned copy of a dataset")
    _add_dataset_args(p)
    p.add_argument("--edge-flip-fraction", type=float, default=0.2)
    p.add_argument("--feat-mask-fraction", type=float, default=0.2)
    p.add_argument("--edges-only", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_poison)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (_UsageError, ConfigError) as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return 1
    except (IngestionError, ContractViolationError, DomainError) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error[numeric]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
