"""
Class-Representative Objective.

For a sample x of class s with hidden representation r = phi(x W_e^T):

    E(x) = ||x - x_hat||^2
           + lambda_same[s] * ||r - mean_s||^2
           - sum_{i != s} lambda_other[i] * ||r - mean_i||^2

mean_i is the average hidden representation of the training samples of class i.
Batch losses average E over the rows.

Gradients treat the class means as constants: they are refreshed between
iterations and never differentiated through. With r and a = x W_e^T:

    dE/dx_hat = 2 (x_hat - x)
    dE/dW_d   = (dE/dx_hat)^T r
    dE/dr     = (dE/dx_hat) W_d + 2 lambda_same[s] (r - mean_s)
                - 2 sum_{i != s} lambda_other[i] (r - mean_i)
    dE/dW_e   = (dE/dr * phi'(a))^T x
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.components.data import LabeledDataset
from app.components.numkit import as_matrix
from app.errors import DatasetError, ParameterError, ShapeError

from .config import TrainConfig
from .layer import AutoencoderLayer, encode, pre_activation


@dataclass(frozen=True, eq=False)
class ClassMeans:
    """Per-class mean hidden representation, one row per class index."""

    means: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", as_matrix(self.means, "class means"))

    @property
    def n(self) -> int:
        return self.means.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class LossBreakdown:
    """
    Batch-averaged loss terms.

    `intra` and `inter` are unweighted average squared distances (to the own-class
    mean, and summed over the other-class means); the weighted variants carry the
    lambda factors, and `total = reconstruction + weighted_intra - weighted_inter`.
    """

    reconstruction: float
    intra: float
    inter: float
    weighted_intra: float
    weighted_inter: float
    total: float

    def as_row(self) -> dict:
        return {
            "reconstruction": self.reconstruction,
            "intra": self.intra,
            "inter": self.inter,
            "weighted_intra": self.weighted_intra,
            "weighted_inter": self.weighted_inter,
            "total": self.total,
        }


def class_means(layer: AutoencoderLayer, data: LabeledDataset) -> ClassMeans:
    """
    Mean of phi(x W_e^T) over the samples of each class.

    Raises:
        DatasetError: If a class has no samples; the message names the class.
    """
    hidden = encode(layer, data.samples)
    means = np.empty((data.n_classes, layer.hidden_dim))
    for c in range(data.n_classes):
        rows = hidden[data.labels == c]
        if rows.shape[0] == 0:
            raise DatasetError(f"class {c} ({data.name_of(c)}) has no samples; cannot compute its mean")
        means[c] = rows.mean(axis=0)
    return ClassMeans(means)


def squared_distances(hidden: np.ndarray, means: ClassMeans) -> np.ndarray:
    """(rows, n_classes) matrix of ||r - mean_i||^2."""
    out = np.empty((hidden.shape[0], means.n))
    for i in range(means.n):
        out[:, i] = np.sum((hidden - means.means[i]) ** 2, axis=1)
    return out


def _check_batch(layer: AutoencoderLayer, samples, labels, means: ClassMeans):
    x = as_matrix(samples, "samples")
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if x.shape[1] != layer.input_dim:
        raise ShapeError(f"samples have {x.shape[1]} columns but the layer expects {layer.input_dim}")
    if y.shape[0] != x.shape[0]:
        raise ShapeError(f"{y.shape[0]} labels for {x.shape[0]} samples")
    if means.hidden_dim != layer.hidden_dim:
        raise ShapeError(f"class means have {means.hidden_dim} entries but the layer has "
                         f"{layer.hidden_dim} hidden units")
    if y.size and (y.min() < 0 or y.max() >= means.n):
        bad = int(y.max()) if y.max() >= means.n else int(y.min())
        raise ParameterError(f"label {bad} is outside the {means.n} classes the means cover")
    return x, y


def per_sample_terms(layer: AutoencoderLayer, samples, labels, means: ClassMeans,
                     cfg: TrainConfig) -> Tuple[np.ndarray, ...]:
    """
    Per-row loss terms.

    Returns:
        tuple: (reconstruction, intra, inter, weighted_intra, weighted_inter, total),
        each an array with one entry per row.
    """
    x, y = _check_batch(layer, samples, labels, means)
    hidden = encode(layer, x)
    x_hat = hidden @ layer.decoder_weights.T

    reconstruction = np.sum((x - x_hat) ** 2, axis=1)
    dist = squared_distances(hidden, means)
    rows = np.arange(x.shape[0])
    intra = dist[rows, y]

    lam_same = cfg.same_weights(means.n)
    lam_other = cfg.other_weights(means.n)
    weighted_intra = lam_same[y] * intra
    inter = np.zeros(x.shape[0])
    weighted_inter = np.zeros(x.shape[0])
    for i in range(means.n):
        other = y != i
        inter = inter + np.where(other, dist[:, i], 0.0)
        weighted_inter = weighted_inter + np.where(other, lam_other[i] * dist[:, i], 0.0)

    total = reconstruction + weighted_intra - weighted_inter
    return reconstruction, intra, inter, weighted_intra, weighted_inter, total


def sample_losses(layer: AutoencoderLayer, samples, labels, means: ClassMeans, cfg: TrainConfig) -> np.ndarray:
    return per_sample_terms(layer, samples, labels, means, cfg)[-1]


def batch_loss(layer: AutoencoderLayer, samples, labels, means: ClassMeans, cfg: TrainConfig) -> LossBreakdown:
    rec, intra, inter, w_intra, w_inter, _ = per_sample_terms(layer, samples, labels, means, cfg)
    reconstruction = float(np.mean(rec))
    weighted_intra = float(np.mean(w_intra))
    weighted_inter = float(np.mean(w_inter))
    return LossBreakdown(
        reconstruction=reconstruction,
        intra=float(np.mean(intra)),
        inter=float(np.mean(inter)),
        weighted_intra=weighted_intra,
        weighted_inter=weighted_inter,
        total=reconstruction + weighted_intra - weighted_inter,
    )


def loss(layer: AutoencoderLayer, x, label: int, means: ClassMeans, cfg: TrainConfig) -> LossBreakdown:
    """
    Loss of a single sample.

    Raises:
        ParameterError: If `label` is not a class the means cover.
        ShapeError: If `x` holds more than one row.
    """
    x = as_matrix(x, "sample")
    if x.shape[0] != 1:
        raise ShapeError(f"loss takes a single sample, got {x.shape[0]} rows")
    return batch_loss(layer, x, [label], means, cfg)


def dataset_loss(layer: AutoencoderLayer, data: LabeledDataset, means: ClassMeans, cfg: TrainConfig) -> LossBreakdown:
    return batch_loss(layer, data.samples, data.labels, means, cfg)


def two_class_loss(layer: AutoencoderLayer, x, label: int, means: ClassMeans,
                   lambda_male: float, lambda_female: float) -> float:
    """
    Two-class form of the objective for one sample; class 0 is male, class 1 female.

    A male sample pays lambda_male * ||r - mean_m||^2 and gains
    lambda_female * ||r - mean_f||^2; a female sample the mirror image.
    """
    if means.n != 2:
        raise ParameterError(f"two-class loss needs exactly 2 class means, got {means.n}")
    if label not in (0, 1):
        raise ParameterError(f"two-class loss takes label 0 or 1, got {label}")
    x = as_matrix(x, "sample")
    if x.shape[0] != 1:
        raise ShapeError(f"two-class loss takes a single sample, got {x.shape[0]} rows")
    hidden = encode(layer, x)
    x_hat = hidden @ layer.decoder_weights.T

    reconstruction = np.sum((x - x_hat) ** 2, axis=1)
    dist = squared_distances(hidden, means)
    lam = (lambda_male, lambda_female)
    own, other = label, 1 - label
    total = reconstruction + lam[own] * dist[:, own] - lam[other] * dist[:, other]
    return float(total[0])


def gradients(layer: AutoencoderLayer, batch: LabeledDataset, means: ClassMeans,
              cfg: TrainConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Analytic gradient of the batch-averaged loss with the class means held fixed.

    Returns:
        tuple: (dW_e, dW_d) with the shapes of the layer's weights.
    """
    x, y = _check_batch(layer, batch.samples, batch.labels, means)
    n = x.shape[0]
    pre = pre_activation(layer, x)
    hidden = layer.activation.forward(pre)
    x_hat = hidden @ layer.decoder_weights.T

    grad_out = 2.0 * (x_hat - x)
    grad_dec = grad_out.T @ hidden / n
    grad_hidden = grad_out @ layer.decoder_weights

    if cfg.has_class_terms:
        lam_same = cfg.same_weights(means.n)
        lam_other = cfg.other_weights(means.n)
        pull = 2.0 * lam_same[y][:, None] * (hidden - means.means[y])
        push = np.zeros_like(hidden)
        for i in range(means.n):
            coeff = np.where(y != i, 2.0 * lam_other[i], 0.0)
            push = push + coeff[:, None] * (hidden - means.means[i])
        grad_hidden = grad_hidden + pull - push

    grad_pre = grad_hidden * layer.activation.derivative(pre, hidden)
    grad_enc = grad_pre.T @ x / n
    return grad_enc, grad_dec
