"""Command line interface.

    riemann-ids train --dataset nslkdd --train KDDTrain+.txt --classifier mdrm
    riemann-ids eval --model out/model.json --test KDDTest+.txt
    riemann-ids tangent-viz --dataset unsw --train train.csv --test test.csv
    riemann-ids mean-matrices --model out/model.json

Settings resolve as defaults < ``--config`` JSON file < ``RIEMANN_IDS_*``
environment variables < flags. Exit codes: 0 ok, 2 I/O or configuration
error, 3 numerical failure.
"""
import argparse
import json
import logging
import os
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import pipeline
from .classify import TrainingError
from .dataio import (
    ATTACK,
    BundleError,
    DataFormatError,
    load_bundle,
    load_dataset,
    binarize_labels,
    save_bundle,
    write_matrix_grid,
    write_roc,
    write_tangent_coords,
)
from .linalg import EigenConvergenceError, NotSPDError
from .manifold import KarcherConvergenceError
from .metrics import evaluate

log = logging.getLogger("riemann_ids")

ENV_PREFIX = "RIEMANN_IDS_"
EXIT_OK, EXIT_IO, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (NotSPDError, KarcherConvergenceError, EigenConvergenceError, TrainingError, FloatingPointError)

_FIELD_TYPES = {f.name: f.type for f in fields(pipeline.RunConfig)}


class ConfigError(ValueError):
    pass


def _coerce(name, value):
    kind = _FIELD_TYPES[name]
    if value is None:
        return None
    if kind is bool or kind == "bool":
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if kind in (int, "int"):
        return int(value)
    if kind in (float, "float"):
        return float(value)
    return str(value)


def resolve_config(args, environ=None):
    """Merge defaults, config file, environment and explicit flags."""
    environ = os.environ if environ is None else environ
    merged = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        unknown = set(data) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    for name in _FIELD_TYPES:
        env = environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            merged[name] = env
    for name in _FIELD_TYPES:
        val = getattr(args, name, None)
        if val is not None:
            merged[name] = val
    try:
        return pipeline.RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _require(path, what):
    if not path:
        raise ConfigError(f"missing --{what}")
    if not Path(path).is_file():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return path


def _out_dir(cfg):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(cfg):
    _require(cfg.train, "train")
    t0 = time.perf_counter()
    table = load_dataset(cfg.dataset, cfg.train)
    t_load = time.perf_counter() - t0
    bundle = pipeline.train(table, cfg)
    t_fit = time.perf_counter() - t0 - t_load
    out = _out_dir(cfg)
    model_path = Path(cfg.model) if cfg.model else out / "model.json"
    save_bundle(bundle, model_path)
    labels = binarize_labels(table)
    train_log = {
        "config": {**cfg.model_fields(), "train": cfg.train, "out_dir": cfg.out_dir},
        "rows": len(table),
        "class_counts": {k: int(np.sum(labels == k)) for k in dict.fromkeys(labels)},
        "model": str(model_path),
        "timings_s": {"load": t_load, "fit": t_fit},
    }
    (out / "train_log.json").write_text(json.dumps(train_log, indent=2))
    log.info("trained %s on %d rows in %.1fs -> %s", cfg.classifier, len(table), t_fit, model_path)
    return model_path


def cmd_eval(cfg):
    model_path = _require(cfg.model, "model")
    _require(cfg.test, "test")
    bundle = load_bundle(model_path)
    if bundle.dataset != cfg.dataset:
        log.info("using dataset %s from bundle", bundle.dataset)
    table = load_dataset(bundle.dataset, cfg.test)
    t0 = time.perf_counter()
    predicted, scores = pipeline.predict(bundle, table)
    actual = list(binarize_labels(table))
    report = evaluate(actual, predicted, labels=("normal", "attack"), scores=scores, positive_label=ATTACK)
    out = _out_dir(cfg)
    doc = report.to_dict()
    doc["config"] = {**bundle.config, "model": str(model_path), "test": cfg.test}
    doc["seed"] = bundle.config.get("seed")
    doc["predict_seconds"] = time.perf_counter() - t0
    (out / "report.json").write_text(json.dumps(doc, indent=2))
    (out / "report.txt").write_text(report.to_text())
    if report.roc is not None:
        write_roc(out / "roc.txt", *report.roc)
    sys.stdout.write(report.to_text())
    return report


def cmd_tangent_viz(cfg, p_viz=None, t_viz=None):
    _require(cfg.train, "train")
    p_def, t_def = pipeline.VIZ_SHAPE[cfg.dataset]
    p_viz = p_viz or p_def
    t_viz = t_viz or t_def
    train_tab = load_dataset(cfg.dataset, cfg.train)
    tables = [load_dataset(cfg.dataset, _require(cfg.test, "test"))] if cfg.test else []
    _, coords = pipeline.tangent_coordinates(train_tab, tables, p_viz, t_viz, cfg.alpha, cfg.karcher)
    out = _out_dir(cfg)
    paths = [out / "tangent_train.csv"]
    write_tangent_coords(paths[0], coords[0], binarize_labels(train_tab))
    if tables:
        paths.append(out / "tangent_test.csv")
        write_tangent_coords(paths[1], coords[1], binarize_labels(tables[0]))
    return paths


def cmd_mean_matrices(cfg):
    if cfg.model:
        bundle = load_bundle(_require(cfg.model, "model"))
        if bundle.kind != "mdrm":
            raise ConfigError("mean-matrices needs an MDRM bundle (or --train data)")
        model = bundle.classifier
    else:
        _require(cfg.train, "train")
        cfg.classifier = "mdrm"
        model = pipeline.train(load_dataset(cfg.dataset, cfg.train), cfg).classifier
    out = _out_dir(cfg)
    paths = []
    for lab, q in zip(model.class_labels, model.class_means):
        path = out / f"mean_{lab}.csv"
        write_matrix_grid(path, q)
        paths.append(path)
    return paths


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings")
    common.add_argument("--dataset", choices=("nslkdd", "unsw"))
    common.add_argument("--train")
    common.add_argument("--test")
    common.add_argument("--model", help="bundle path")
    common.add_argument("--classifier", choices=pipeline.CLASSIFIERS)
    common.add_argument("--p", type=int)
    common.add_argument("--t", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--drop-column", dest="drop_column")
    common.add_argument("--center-rows", dest="center_rows", action="store_const", const=True)
    common.add_argument("--order", choices=("row", "col"))
    common.add_argument("--epochs", type=int)
    common.add_argument("--batch", type=int)
    common.add_argument("--lr", type=float)
    common.add_argument("--hidden", type=int)
    common.add_argument("--karcher-iters", dest="karcher_iters", type=int)
    common.add_argument("--karcher-tol", dest="karcher_tol", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="riemann-ids", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="fit a model bundle")
    sub.add_parser("eval", parents=[common], help="score a test file with a bundle")
    viz = sub.add_parser("tangent-viz", parents=[common], help="export tangent-space coordinates")
    viz.add_argument("--p-viz", type=int)
    viz.add_argument("--t-viz", type=int)
    sub.add_parser("mean-matrices", parents=[common], help="export per-class Riemannian means")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "train":
            cmd_train(cfg)
        elif args.command == "eval":
            cmd_eval(cfg)
        elif args.command == "tangent-viz":
            cmd_tangent_viz(cfg, args.p_viz, args.t_viz)
        else:
            cmd_mean_matrices(cfg)
    except NUMERIC_ERRORS as exc:
        print(f"riemann-ids {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, DataFormatError, BundleError, ConfigError, ValueError) as exc:
        print(f"riemann-ids {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
