"""
Run Configuration.

Config files are flat `key = value` lines; `#` starts a comment, blank lines are
ignored. Command-line flags override file values. Every key is typed and validated
before any work starts, and keys a subcommand does not accept are rejected.

Example:

    # 24x24 run, two layers
    hidden_dims = 576, 576
    lambda_same = 0.1
    lambda_other = 0.1
    learning_rate = 0.002
    iterations = 300
"""

import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from app.components.autogen import TrainConfig
from app.components.data import SynthSpec
from app.components.numkit import ActivationFactory
from app.errors import AutoGenError, ConfigError

from .pipeline import ClassifierConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KeySpec:
    kind: str
    help: str


KEYS: Dict[str, KeySpec] = {
    "seed": KeySpec("int", "global seed for every random draw (default 7)"),
    # synth
    "resolution": KeySpec("int", "image side length: synthetic size, or ingest resize target (default 16)"),
    "per_class": KeySpec("int", "synthetic samples per class (default 200)"),
    "class_separation": KeySpec("float", "pixel-space separation of the class templates (default 0.4)"),
    "noise_sigma": KeySpec("float", "Gaussian pixel noise (default 0.1)"),
    "template_shift": KeySpec("float", "phase shift of the class pattern, for target domains (default 0.0)"),
    "spectrum": KeySpec("str", "visible or nir (default visible)"),
    "train_fraction": KeySpec("float", "train share when a test file is also written (default 0.5)"),
    # autoencoder
    "hidden_dims": KeySpec("ints", "comma-separated hidden sizes per layer (default: input size, depth times)"),
    "depth": KeySpec("int", "number of stacked layers when hidden_dims is not set (default 1)"),
    "activation": KeySpec("str", "sigmoid, tanh or linear (default sigmoid)"),
    "lambda_same": KeySpec("lambda", "intra-class weight, one value or one per class (default 0.1)"),
    "lambda_other": KeySpec("lambda", "inter-class weight, one value or one per class (default 0.1)"),
    "learning_rate": KeySpec("float", "autoencoder gradient descent step (default 0.005)"),
    "iterations": KeySpec("int", "autoencoder iterations per layer (default 200)"),
    "batch_size": KeySpec("int", "autoencoder minibatch size, 0 for full batch (default 0)"),
    "init_scale": KeySpec("float", "weight init scale s, U[-s/sqrt(fan_in), s/sqrt(fan_in)] (default 1.0)"),
    "divergence_limit": KeySpec("float", "abort when |loss| exceeds this (default 1e12)"),
    # classifier
    "clf_epochs": KeySpec("int", "classifier training epochs (default 2000)"),
    "clf_learning_rate": KeySpec("float", "classifier gradient descent step (default 1.0)"),
    "clf_batch_size": KeySpec("int", "classifier minibatch size, 0 for full batch (default 0)"),
    "retrain_classifier": KeySpec("bool", "finetune: retrain the classifier on tuned features (default true)"),
    # evaluation / export
    "positive_class": KeySpec("int", "class index treated as positive in ROC analysis (default 1)"),
    "max_images": KeySpec("int", "reconstruct: number of samples to export (default 16)"),
}

_AE_KEYS = ("activation", "lambda_same", "lambda_other", "learning_rate", "iterations", "batch_size",
            "init_scale", "divergence_limit")
_CLF_KEYS = ("clf_epochs", "clf_learning_rate", "clf_batch_size")

COMMAND_KEYS: Dict[str, Tuple[str, ...]] = {
    "synth": ("seed", "resolution", "per_class", "class_separation", "noise_sigma", "template_shift",
              "spectrum", "train_fraction"),
    "train": ("seed", "hidden_dims", "depth") + _AE_KEYS + _CLF_KEYS,
    "finetune": ("seed", "retrain_classifier") + tuple(k for k in _AE_KEYS if k not in ("activation", "init_scale"))
                + _CLF_KEYS,
    "ingest": ("seed", "resolution", "train_fraction"),
    "extract": ("seed",),
    "evaluate": ("seed", "positive_class"),
    "reconstruct": ("seed", "max_images"),
    "roc": ("seed", "positive_class"),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 7
    resolution: int = 16
    per_class: int = 200
    class_separation: float = 0.4
    noise_sigma: float = 0.1
    template_shift: float = 0.0
    spectrum: str = "visible"
    train_fraction: float = 0.5
    hidden_dims: Tuple[int, ...] = ()
    depth: int = 1
    activation: str = "sigmoid"
    lambda_same: Any = 0.1
    lambda_other: Any = 0.1
    learning_rate: float = 0.005
    iterations: int = 200
    batch_size: int = 0
    init_scale: float = 1.0
    divergence_limit: float = 1e12
    clf_epochs: int = 2000
    clf_learning_rate: float = 1.0
    clf_batch_size: int = 0
    retrain_classifier: bool = True
    positive_class: int = 1
    max_images: int = 16

    @classmethod
    def resolve(cls, command: str, file_values: Mapping[str, str],
                overrides: Optional[Mapping[str, Any]] = None) -> "RunConfig":
        """
        Merges file values and flag overrides (flags win) for one subcommand.

        Raises:
            ConfigError: On keys the command does not accept, unparsable values, or
                values that fail validation; messages name the key.
        """
        if command not in COMMAND_KEYS:
            raise ConfigError(f"unknown command {command!r}")
        accepted = COMMAND_KEYS[command]
        merged: Dict[str, Any] = {}
        for source, values in (("config file", file_values), ("flags", overrides or {})):
            for key, raw in values.items():
                if raw is None:
                    continue
                if key not in accepted:
                    raise ConfigError(f"unknown key {key!r} for '{command}' ({source}); "
                                      f"accepted keys: {', '.join(accepted)}")
                merged[key] = coerce(key, raw)
        config = replace(cls(), **merged)
        config.validate(command)
        return config

    def validate(self, command: str):
        checks = {
            "per_class": self.per_class >= 1,
            "resolution": self.resolution >= 4,
            "class_separation": self.class_separation >= 0,
            "noise_sigma": self.noise_sigma >= 0,
            "spectrum": self.spectrum in ("visible", "nir"),
            "train_fraction": 0.0 < self.train_fraction < 1.0,
            "hidden_dims": all(d >= 1 for d in self.hidden_dims),
            "depth": self.depth >= 1,
            "activation": self.activation in ActivationFactory.names(),
            "learning_rate": self.learning_rate >= 0,
            "iterations": self.iterations >= 1,
            "batch_size": self.batch_size >= 0,
            "init_scale": self.init_scale > 0,
            "divergence_limit": self.divergence_limit > 0,
            "clf_epochs": self.clf_epochs >= 0,
            "clf_learning_rate": self.clf_learning_rate >= 0,
            "clf_batch_size": self.clf_batch_size >= 0,
            "positive_class": self.positive_class >= 0,
            "max_images": self.max_images >= 0,
            "seed": 0 <= self.seed < 2 ** 64,
        }
        for key in COMMAND_KEYS[command]:
            if key in checks and not checks[key]:
                raise ConfigError(f"invalid value for {key}: {getattr(self, key)!r} ({KEYS[key].help})")
        if command in ("train", "finetune"):
            try:
                self.train_config()
            except AutoGenError as e:
                raise ConfigError(str(e))

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lambda_same=self.lambda_same,
            lambda_other=self.lambda_other,
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            batch_size=self.batch_size,
            seed=self.seed,
            init_scale=self.init_scale,
            activation=self.activation,
            divergence_limit=self.divergence_limit,
        )

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(epochs=self.clf_epochs, learning_rate=self.clf_learning_rate,
                                batch_size=self.clf_batch_size, seed=self.seed)

    def synth_spec(self, seed_offset: int = 0) -> SynthSpec:
        return SynthSpec(
            resolution=self.resolution,
            per_class=self.per_class,
            class_separation=self.class_separation,
            noise_sigma=self.noise_sigma,
            seed=self.seed + seed_offset,
            template_shift=self.template_shift,
            spectrum=self.spectrum,
        )

    def layer_dims(self, input_dim: int) -> Tuple[int, ...]:
        """Explicit hidden sizes, or `depth` layers as wide as the input."""
        return self.hidden_dims if self.hidden_dims else (input_dim,) * self.depth


def coerce(key: str, raw: Any) -> Any:
    """Converts a raw file/flag value to the key's type."""
    kind = KEYS[key].kind
    if not isinstance(raw, str):
        if kind == "ints" and isinstance(raw, (list, tuple)):
            return tuple(int(v) for v in raw)
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            return text.lower()
        if kind == "bool":
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "ints":
            return tuple(int(part) for part in text.split(",") if part.strip())
        if kind == "lambda":
            parts = [float(part) for part in text.split(",") if part.strip()]
            if len(parts) == 1 and "," not in text:
                return parts[0]
            return tuple(parts)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r} as {kind}")
    raise ConfigError(f"unsupported key type {kind} for {key}")


def parse_config_file(path: str) -> Dict[str, str]:
    """
    Reads a flat `key = value` file.

    Raises:
        ConfigError: On lines without `=`, empty keys, or duplicated keys (with line numbers).
    """
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{number}: expected 'key = value'")
            key, value = (part.strip() for part in text.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{number}: empty key")
            if key in values:
                raise ConfigError(f"{path}:{number}: duplicate key {key!r}")
            values[key] = value
    logger.debug("Read %d config keys from %s", len(values), path)
    return values
