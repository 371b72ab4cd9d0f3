"""
Command-Line Front End for the AutoGen Toolkit.

Runs the gender-recognition pipeline end to end in batch mode: synthesize or load data,
train the class-representative autoencoder stack and its classifier, fine-tune on a
target domain, and evaluate or visualize the result.

Usage:
    python autogen_cli.py synth --out train.crds --test-out test.crds
    python autogen_cli.py ingest --images faces/ --manifest faces/labels.csv --out faces.crds
    python autogen_cli.py train --data train.crds --config run.cfg --out model.crae
    python autogen_cli.py train --data visible.crds nir.crds --out combined.crae
    python autogen_cli.py finetune --model model.crae --data target.crds --out tuned.crae
    python autogen_cli.py extract --model model.crae --data test.crds --out features.crds
    python autogen_cli.py evaluate --model model.crae --data test.crds --out report.txt --roc-out roc.csv
    python autogen_cli.py reconstruct --model model.crae --data test.crds --out recon/
    python autogen_cli.py roc --model model.crae --data test.crds --out roc.csv

Every subcommand accepts `--config FILE` (flat `key = value` lines) and one flag per
config key; flags override the file. Errors go to stderr prefixed with `error:` and
the exit code is 1 (2 for command-line usage errors).
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from app.components.autogen import LossBreakdown, features_dataset
from app.components.data import generate_synthetic, load_dataset, load_image_dir, save_dataset, split
from app.components.evaluation import (
    export_class_mean_images,
    export_reconstructions,
    roc,
    write_confusion_csv,
    write_report,
    write_roc_csv,
)
from app.errors import AutoGenError
from app.model_store import load_model, save_model
from app.services import RunAnalytics
from app.services.config import COMMAND_KEYS, KEYS, RunConfig, parse_config_file
from app.services.logging_setup import setup_logging
from app.services.pipeline import (
    ClassifierConfig,
    combine_datasets,
    evaluate_bundle,
    fine_tune_bundle,
    score_bundle,
    train_pipeline,
)

logger = logging.getLogger("autogen.cli")

HISTORY_COLUMNS = ["phase", "iteration", "reconstruction", "intra", "inter", "weighted_intra",
                   "weighted_inter", "total"]


class _Parser(argparse.ArgumentParser):
    """argparse with the toolkit's `error:` prefix on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(2)


# ---------------- HELPERS ---------------- #

def _resolve(command: str, args: argparse.Namespace) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in COMMAND_KEYS[command]}
    if getattr(args, "plain", False):
        overrides["lambda_same"] = "0"
        overrides["lambda_other"] = "0"
    return RunConfig.resolve(command, file_values, overrides)


def _history_frame(histories: List[List[LossBreakdown]], clf_history: List[float], prefix: str) -> pd.DataFrame:
    rows = []
    for j, history in enumerate(histories):
        for i, breakdown in enumerate(history):
            rows.append({"phase": f"{prefix}-{j + 1}", "iteration": i, **breakdown.as_row()})
    for i, value in enumerate(clf_history):
        rows.append({"phase": "classifier" if prefix == "layer" else f"{prefix}-classifier",
                     "iteration": i, "total": value})
    return pd.DataFrame(rows, columns=HISTORY_COLUMNS)


def _history_path(model_path: str, explicit: Optional[str]) -> str:
    return explicit if explicit else model_path + ".history.csv"


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _summarize():
    stats = RunAnalytics().get_stats()
    for phase, value in stats["final_loss"].items():
        logger.info("summary: %s final loss %.6f", phase, value)


# ---------------- COMMANDS ---------------- #

def _write_splits(command: str, data, config: RunConfig, args) -> int:
    if args.test_out:
        train, test = split(data, config.train_fraction, config.seed, data.subject_ids or None)
        _ensure_parent(args.test_out)
        save_dataset(test, args.test_out)
    else:
        train = data
    _ensure_parent(args.out)
    save_dataset(train, args.out)
    print(f"{command}: wrote {train.rows} x {train.dim} samples to {args.out}")
    return 0


def cmd_synth(args) -> int:
    config = _resolve("synth", args)
    return _write_splits("synth", generate_synthetic(config.synth_spec()), config, args)


def cmd_ingest(args) -> int:
    config = _resolve("ingest", args)
    data = load_image_dir(args.images, args.manifest, config.resolution).validate()
    return _write_splits("ingest", data, config, args)


def cmd_train(args) -> int:
    config = _resolve("train", args)
    data = combine_datasets([load_dataset(path).validate(unit_range=False) for path in args.data])
    dims = config.layer_dims(data.dim)
    clf = config.classifier_config() if config.clf_epochs > 0 else None
    result = train_pipeline(data, dims, config.train_config(), clf)

    _ensure_parent(args.out)
    save_model(result.bundle, args.out)
    history_path = _history_path(args.out, args.history)
    _history_frame(result.ae_histories, result.clf_history, "layer").to_csv(history_path, index=False)
    _summarize()
    print(f"train: layers {[data.dim] + list(dims)} -> {args.out} (history: {history_path})")
    return 0


def cmd_finetune(args) -> int:
    config = _resolve("finetune", args)
    bundle = load_model(args.model)
    data = load_dataset(args.data).validate(unit_range=False)
    clf = config.classifier_config() if config.retrain_classifier and config.clf_epochs > 0 else None
    result = fine_tune_bundle(bundle, data, config.train_config(), clf)

    _ensure_parent(args.out)
    save_model(result.bundle, args.out)

    previous_path = _history_path(args.model, args.previous_history)
    frames = []
    if os.path.exists(previous_path):
        frames.append(pd.read_csv(previous_path))
    frames.append(_history_frame(result.ae_histories, result.clf_history, "fine-tune"))
    history_path = _history_path(args.out, args.history)
    pd.concat(frames, ignore_index=True)[HISTORY_COLUMNS].to_csv(history_path, index=False)
    _summarize()
    print(f"finetune: {args.model} -> {args.out} (history: {history_path})")
    return 0


def cmd_extract(args) -> int:
    _resolve("extract", args)
    bundle = load_model(args.model)
    data = load_dataset(args.data)
    if data.dim != bundle.input_dim:
        raise AutoGenError(f"model expects {bundle.input_dim} inputs but the data has {data.dim}")
    features = features_dataset(bundle.layers, data)
    _ensure_parent(args.out)
    save_dataset(features, args.out)
    print(f"extract: wrote {features.rows} x {features.dim} features to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    config = _resolve("evaluate", args)
    bundle = load_model(args.model)
    data = load_dataset(args.data)
    report, curve = evaluate_bundle(bundle, data, config.positive_class)

    _ensure_parent(args.out)
    write_report(report, args.out)
    if args.confusion_out:
        write_confusion_csv(report, args.confusion_out)
    if args.roc_out and curve is not None:
        write_roc_csv(curve, args.roc_out)

    for c in range(report.n_classes):
        print(f"class {report.name_of(c)}: {100.0 * report.per_class_accuracy[c]:.2f}%")
    print(f"mean class-wise accuracy: {100.0 * report.mean_classwise_accuracy:.2f}%")
    if curve is not None:
        print(f"AUC: {curve.auc:.4f}")
    return 0


def cmd_reconstruct(args) -> int:
    config = _resolve("reconstruct", args)
    bundle = load_model(args.model)
    data = load_dataset(args.data)
    shape = bundle.image_shape or data.image_shape
    if shape is None:
        raise AutoGenError("neither the model nor the dataset records an image shape")
    count = min(config.max_images, data.rows)
    written = export_reconstructions(bundle.layers, data.samples[:count], shape, args.out, bundle.top_means)
    if data.image_shape is not None:
        written += export_class_mean_images(data, args.out)
    print(f"reconstruct: wrote {len(written)} images to {args.out}")
    return 0


def cmd_roc(args) -> int:
    config = _resolve("roc", args)
    bundle = load_model(args.model)
    data = load_dataset(args.data)
    scores, _ = score_bundle(bundle, data)
    if np.ndim(scores) != 1:
        raise AutoGenError("ROC analysis needs a two-class model")
    curve = roc(scores, data.labels, config.positive_class)
    _ensure_parent(args.out)
    write_roc_csv(curve, args.out)
    print(f"roc: AUC {curve.auc:.4f} -> {args.out}")
    return 0


COMMANDS = {
    "synth": (cmd_synth, "generate a synthetic two-class dataset (CRDS)"),
    "ingest": (cmd_ingest, "convert an image directory and label manifest to CRDS"),
    "train": (cmd_train, "train the autoencoder stack and classifier"),
    "finetune": (cmd_finetune, "fine-tune a trained model on new data"),
    "extract": (cmd_extract, "write top-layer features of a dataset (CRDS)"),
    "evaluate": (cmd_evaluate, "class-wise accuracy report and ROC curve"),
    "reconstruct": (cmd_reconstruct, "export reconstructions and class-mean images (PGM)"),
    "roc": (cmd_roc, "write the ROC curve of a two-class model (CSV)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="autogen", description="Class representative autoencoder toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, (handler, summary) in COMMANDS.items():
        keys = COMMAND_KEYS[name]
        epilog = "config keys: " + ", ".join(keys)
        p = sub.add_parser(name, help=summary, description=summary, epilog=epilog)
        p.set_defaults(handler=handler)
        p.add_argument("--config", help="flat 'key = value' config file")
        p.add_argument("--out", required=True, help="output path")
        if name in ("finetune", "extract", "evaluate", "reconstruct", "roc"):
            p.add_argument("--model", required=True, help="CRAE model container")
        if name == "train":
            p.add_argument("--data", required=True, nargs="+",
                           help="CRDS dataset(s); several files (e.g. visible and NIR) are joined by class name")
        elif name == "ingest":
            p.add_argument("--images", required=True, help="directory the manifest paths are relative to")
            p.add_argument("--manifest", required=True, help="'relative_path,label_name[,subject_id]' lines")
        elif name != "synth":
            p.add_argument("--data", required=True, help="CRDS dataset")
        for key in keys:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, help=KEYS[key].help)

        if name in ("synth", "ingest"):
            p.add_argument("--test-out", help="also write a held-out split here (uses train_fraction)")
        if name == "train":
            p.add_argument("--plain", action="store_true", help="plain autoencoder: both lambdas 0")
        if name in ("train", "finetune"):
            p.add_argument("--history", help="loss history CSV (default: <out>.history.csv)")
        if name == "finetune":
            p.add_argument("--previous-history", help="history to append to (default: <model>.history.csv)")
        if name == "evaluate":
            p.add_argument("--roc-out", help="also write the ROC curve CSV")
            p.add_argument("--confusion-out", help="also write the confusion matrix CSV")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(-1 if args.quiet else args.verbose)
    try:
        return args.handler(args)
    except (AutoGenError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
