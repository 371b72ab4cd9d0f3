"""
Feature-Extraction + Classification Pipeline.

Wires the pieces together the way a gender-recognition run uses them:

    images -> autoencoder stack (features) -> [l, l/4, l/16] classifier -> decision

`train_pipeline` fits the stack and the classifier on a training set and returns a
`ModelBundle`; `evaluate_bundle` scores a test set; `transfer` fine-tunes a pretrained
bundle on a small target-domain set and compares it with the untouched bundle.
`combine_datasets` joins training sets from several spectra into one, and
`evaluate_domains` reports each spectrum's test set separately.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from app.components.autogen import (
    LossBreakdown,
    TrainConfig,
    extract_features,
    features_dataset,
    fine_tune_stack,
    stack_class_means,
    stack_train,
)
from app.components.classifier import MlpModel, build_default, predict, train_mlp
from app.components.data import LabeledDataset, concat
from app.components.evaluation import EvalReport, RocCurve, evaluate, roc
from app.errors import ParameterError, ShapeError
from app.model_store import ModelBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassifierConfig:
    """Classifier training settings (cross-entropy, gradient descent)."""

    epochs: int = 2000
    learning_rate: float = 1.0
    batch_size: int = 0
    seed: int = 0


@dataclass(eq=False)
class PipelineResult:
    bundle: ModelBundle
    ae_histories: List[List[LossBreakdown]] = field(default_factory=list)
    clf_history: List[float] = field(default_factory=list)
    report: Optional[EvalReport] = None
    roc: Optional[RocCurve] = None


@dataclass(eq=False)
class TransferResult:
    untuned_report: EvalReport
    tuned_report: EvalReport
    tuned: PipelineResult

    @property
    def gain(self) -> float:
        """Mean class-wise accuracy gained by fine-tuning (ratio, not percentage points)."""
        return self.tuned_report.mean_classwise_accuracy - self.untuned_report.mean_classwise_accuracy


def fit_classifier(layers, train: LabeledDataset, clf: ClassifierConfig):
    features = features_dataset(layers, train)
    model = build_default(features.dim, train.n_classes, clf.seed)
    return train_mlp(model, features, clf.epochs, clf.learning_rate, clf.seed, clf.batch_size)


def train_pipeline(train: LabeledDataset, hidden_dims: Optional[Sequence[int]] = None,
                   cfg: TrainConfig = TrainConfig(), clf: Optional[ClassifierConfig] = ClassifierConfig()) -> PipelineResult:
    """
    Greedy stack training followed by classifier training on the top-layer features.

    Args:
        hidden_dims: Hidden sizes per layer; defaults to one layer as wide as the input.
        clf: Classifier settings, or None to skip the classifier.
    """
    dims = list(hidden_dims) if hidden_dims else [train.dim]
    histories: List[List[LossBreakdown]] = []
    layers = stack_train(train, dims, cfg, histories)
    bundle = ModelBundle(
        layers=layers,
        means=stack_class_means(layers, train),
        image_shape=train.image_shape,
        class_names=train.class_names,
    )
    clf_history: List[float] = []
    if clf is not None:
        bundle.classifier, clf_history = fit_classifier(layers, train, clf)
    return PipelineResult(bundle=bundle, ae_histories=histories, clf_history=clf_history)


def score_bundle(bundle: ModelBundle, data: LabeledDataset):
    """Classifier (scores, labels) for every row of `data`."""
    if bundle.classifier is None:
        raise ShapeError("model has no classifier section")
    if data.dim != bundle.input_dim:
        raise ShapeError(f"model expects {bundle.input_dim} inputs but the data has {data.dim}")
    return predict(bundle.classifier, extract_features(bundle.layers, data.samples))


def evaluate_bundle(bundle: ModelBundle, test: LabeledDataset, positive_class: int = 1):
    """
    Returns:
        tuple: (EvalReport, RocCurve or None). The ROC curve is only produced for two
        classes with both present in `test`.
    """
    scores, labels = score_bundle(bundle, test)
    report = evaluate(labels, test.labels, test.sample_ids or None, test.n_classes,
                      bundle.class_names or test.class_names, positive_class)
    curve = None
    counts = test.class_counts()
    if test.n_classes == 2 and np.all(counts > 0):
        curve = roc(scores, test.labels, positive_class)
    return report, curve


def run_pipeline(train: LabeledDataset, test: LabeledDataset, hidden_dims: Optional[Sequence[int]] = None,
                 cfg: TrainConfig = TrainConfig(), clf: ClassifierConfig = ClassifierConfig()) -> PipelineResult:
    result = train_pipeline(train, hidden_dims, cfg, clf)
    result.report, result.roc = evaluate_bundle(result.bundle, test)
    logger.info("Pipeline mean class-wise accuracy: %.2f%%", 100.0 * result.report.mean_classwise_accuracy)
    return result


def fine_tune_bundle(bundle: ModelBundle, target_train: LabeledDataset, cfg: TrainConfig,
                     clf: Optional[ClassifierConfig] = ClassifierConfig()) -> PipelineResult:
    """
    Fine-tunes every layer on the target data, refreshes the stored class means, and
    (unless `clf` is None) retrains the classifier on the tuned features.
    """
    if target_train.dim != bundle.input_dim:
        raise ShapeError(f"model expects {bundle.input_dim} inputs but the data has {target_train.dim}")
    histories: List[List[LossBreakdown]] = []
    layers = fine_tune_stack(bundle.layers, target_train, cfg, histories)
    tuned = ModelBundle(
        layers=layers,
        means=stack_class_means(layers, target_train),
        classifier=bundle.classifier,
        image_shape=bundle.image_shape or target_train.image_shape,
        class_names=bundle.class_names or target_train.class_names,
    )
    clf_history: List[float] = []
    if clf is not None:
        tuned.classifier, clf_history = fit_classifier(layers, target_train, clf)
    return PipelineResult(bundle=tuned, ae_histories=histories, clf_history=clf_history)


def transfer(bundle: ModelBundle, target_train: LabeledDataset, target_test: LabeledDataset,
             cfg: TrainConfig, clf: ClassifierConfig = ClassifierConfig()) -> TransferResult:
    """
    Compares the pretrained bundle as-is against its fine-tuned version on the target
    domain's test set.
    """
    untuned_report, _ = evaluate_bundle(bundle, target_test)
    tuned = fine_tune_bundle(bundle, target_train, cfg, clf)
    tuned.report, tuned.roc = evaluate_bundle(tuned.bundle, target_test)
    logger.info("Transfer: un-tuned %.2f%% -> fine-tuned %.2f%%", 100.0 * untuned_report.mean_classwise_accuracy,
                100.0 * tuned.report.mean_classwise_accuracy)
    return TransferResult(untuned_report=untuned_report, tuned_report=tuned.report, tuned=tuned)


def combine_datasets(datasets: Sequence[LabeledDataset]) -> LabeledDataset:
    """
    Joins training sets (e.g. visible and NIR images) into one; classes are matched by name.

    Raises:
        ParameterError: If no dataset is given.
    """
    if not datasets:
        raise ParameterError("need at least one dataset to combine")
    combined = reduce(concat, datasets)
    if len(datasets) > 1:
        logger.info("Combined %d datasets into %d samples", len(datasets), combined.rows)
    return combined


def evaluate_domains(bundle: ModelBundle, tests: Mapping[str, LabeledDataset],
                     positive_class: int = 1) -> Dict[str, EvalReport]:
    """One report per named test set, e.g. {"visible": ..., "nir": ...}."""
    reports = {}
    for name, test in tests.items():
        reports[name], _ = evaluate_bundle(bundle, test, positive_class)
        logger.info("%s: mean class-wise accuracy %.2f%%", name, 100.0 * reports[name].mean_classwise_accuracy)
    return reports
