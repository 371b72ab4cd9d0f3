"""
Feed-Forward Classifier.

The downstream network that turns extracted features into a class decision. Hidden
layers use sigmoid units; the output is one sigmoid unit for two classes (its value is
the class-1 score used for ROC analysis) or a softmax over n units otherwise.

Training is full-batch (or seeded minibatch) gradient descent on cross-entropy:
binary cross-entropy for two classes, categorical cross-entropy otherwise.
Probabilities are clipped to [1e-12, 1 - 1e-12] inside the logarithm only.

Decision rule for two classes: label 1 when score >= 0.5.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from app.components.data import LabeledDataset
from app.components.numkit import Sigmoid, as_matrix, make_rng, random_uniform
from app.errors import DivergenceError, ParameterError, ShapeError
from app.services.analytics import RunAnalytics

logger = logging.getLogger(__name__)

SIGMOID = "sigmoid"
SOFTMAX = "softmax"
THRESHOLD = 0.5
_EPS = 1e-12
_sigmoid = Sigmoid()


@dataclass(eq=False)
class DenseLayer:
    """Affine map `a W + b` followed by `activation`; W is (in, out)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = SIGMOID

    def __post_init__(self):
        self.weights = as_matrix(self.weights, "dense weights")
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if self.bias.shape[0] != self.weights.shape[1]:
            raise ShapeError(f"bias has {self.bias.shape[0]} entries for {self.weights.shape[1]} units")
        if self.activation not in (SIGMOID, SOFTMAX):
            raise ParameterError(f"unsupported dense activation {self.activation!r}")

    @property
    def fan_in(self) -> int:
        return self.weights.shape[0]

    @property
    def units(self) -> int:
        return self.weights.shape[1]


@dataclass(eq=False)
class MlpModel:
    layers: List[DenseLayer] = field(default_factory=list)
    n_classes: int = 2

    def __post_init__(self):
        for lower, upper in zip(self.layers, self.layers[1:]):
            if lower.units != upper.fan_in:
                raise ShapeError(f"layer with {lower.units} outputs cannot feed a layer with {upper.fan_in} inputs")

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def dims(self) -> List[int]:
        return [self.layers[0].fan_in] + [layer.units for layer in self.layers]

    @classmethod
    def build(cls, dims: Sequence[int], n_classes: int = 2, seed: int = 0) -> "MlpModel":
        """
        Builds a network with the given input and hidden sizes plus the output layer.

        Weights ~ U[-b, b) with the Glorot bound b = sqrt(6 / (fan_in + fan_out)),
        biases zero.

        Args:
            dims: [input_dim, hidden_1, ..., hidden_k]; every size must be >= 1.
        """
        if n_classes < 2:
            raise ParameterError(f"a classifier needs at least 2 classes, got {n_classes}")
        if not dims or any(d < 1 for d in dims):
            raise ParameterError(f"layer sizes must all be at least 1, got {list(dims)}")
        out_units = 1 if n_classes == 2 else n_classes
        sizes = list(dims) + [out_units]
        rng = make_rng(seed)
        layers = []
        for i, (fan_in, units) in enumerate(zip(sizes, sizes[1:])):
            bound = np.sqrt(6.0 / (fan_in + units))
            act = SOFTMAX if (i == len(sizes) - 2 and n_classes > 2) else SIGMOID
            layers.append(DenseLayer(random_uniform(rng, fan_in, units, -bound, bound), np.zeros(units), act))
        return cls(layers, n_classes)

    def copy(self) -> "MlpModel":
        return copy.deepcopy(self)

    def same_weights_as(self, other: "MlpModel") -> bool:
        return (self.n_classes == other.n_classes and len(self.layers) == len(other.layers)
                and all(a.activation == b.activation and np.array_equal(a.weights, b.weights)
                        and np.array_equal(a.bias, b.bias) for a, b in zip(self.layers, other.layers)))


def build_default(feature_len: int, n_classes: int = 2, seed: int = 0) -> MlpModel:
    """
    The [l, l/4, l/16] network: hidden sizes floor(l/4) and floor(l/16).

    Raises:
        ParameterError: If `feature_len < 16` (the second hidden layer would be empty).
    """
    if feature_len < 16:
        raise ParameterError(f"feature length must be at least 16 for an [l, l/4, l/16] network, got {feature_len}")
    return MlpModel.build([feature_len, feature_len // 4, feature_len // 16], n_classes, seed)


def _softmax(pre: np.ndarray) -> np.ndarray:
    shifted = pre - pre.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: MlpModel, features: np.ndarray) -> List[np.ndarray]:
    """Activations of every layer, input first."""
    x = as_matrix(features, "features")
    if x.shape[1] != model.input_dim:
        raise ShapeError(f"features have {x.shape[1]} columns but the classifier expects {model.input_dim}")
    outs = [x]
    for layer in model.layers:
        pre = outs[-1] @ layer.weights + layer.bias
        outs.append(_softmax(pre) if layer.activation == SOFTMAX else _sigmoid.forward(pre))
    return outs


def _targets(model: MlpModel, labels: np.ndarray) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y.size and (y.min() < 0 or y.max() >= model.n_classes):
        raise ParameterError(f"labels must lie in [0, {model.n_classes})")
    if model.n_classes == 2:
        return y.astype(np.float64).reshape(-1, 1)
    onehot = np.zeros((y.shape[0], model.n_classes))
    onehot[np.arange(y.shape[0]), y] = 1.0
    return onehot


def cross_entropy(model: MlpModel, probs: np.ndarray, targets: np.ndarray) -> float:
    p = np.clip(probs, _EPS, 1.0 - _EPS)
    if model.n_classes == 2:
        return float(-np.mean(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p)))
    return float(-np.mean(np.sum(targets * np.log(p), axis=1)))


def mlp_loss_and_gradients(model: MlpModel, features: np.ndarray,
                           labels: np.ndarray) -> Tuple[float, List[Tuple[np.ndarray, np.ndarray]]]:
    """
    Mean cross-entropy and its gradient per layer.

    Returns:
        tuple: (loss, [(dW, db) per layer, input side first]).
    """
    outs = forward(model, features)
    targets = _targets(model, labels)
    n = targets.shape[0]
    value = cross_entropy(model, outs[-1], targets)

    # sigmoid + BCE and softmax + CE share this output delta
    delta = (outs[-1] - targets) / n
    grads = []
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        grads.append((outs[k].T @ delta, delta.sum(axis=0)))
        if k:
            delta = (delta @ layer.weights.T) * _sigmoid.derivative(None, outs[k])
    grads.reverse()
    return value, grads


def train_mlp(model: MlpModel, features: LabeledDataset, epochs: int, learning_rate: float,
              seed: int = 0, batch_size: int = 0) -> Tuple[MlpModel, List[float]]:
    """
    Backpropagation training; returns a trained copy and the per-epoch loss.

    The loss recorded for an epoch is the full-data loss before that epoch's updates.
    `seed` drives minibatch shuffling when `batch_size > 0`.

    Raises:
        ShapeError: If the feature dimension does not match the model.
        DivergenceError: If the loss becomes non-finite.
    """
    if epochs < 0:
        raise ParameterError(f"epochs must be non-negative, got {epochs}")
    if learning_rate < 0:
        raise ParameterError(f"learning_rate must be non-negative, got {learning_rate}")
    if features.dim != model.input_dim:
        raise ShapeError(f"features have {features.dim} columns but the classifier expects {model.input_dim}")

    trained = model.copy()
    rng = make_rng(seed)
    history: List[float] = []
    x, y = features.samples, features.labels

    for epoch in range(epochs):
        if batch_size:
            order = rng.permutation(features.rows)
            batches = [order[s:s + batch_size] for s in range(0, features.rows, batch_size)]
        else:
            batches = [None]

        for b, idx in enumerate(batches):
            bx, by = (x, y) if idx is None else (x[idx], y[idx])
            value, grads = mlp_loss_and_gradients(trained, bx, by)
            if b == 0:
                full = value if idx is None else mlp_loss_and_gradients(trained, x, y)[0]
                if not np.isfinite(full):
                    RunAnalytics().log_event("DIVERGED", "classifier", {"iteration": epoch, "loss": full})
                    raise DivergenceError(f"classifier: training diverged at epoch {epoch} (loss {full!r})",
                                          iteration=epoch, value=full)
                history.append(full)
            for layer, (gw, gb) in zip(trained.layers, grads):
                layer.weights = layer.weights - learning_rate * gw
                layer.bias = layer.bias - learning_rate * gb

        if epoch % 100 == 0:
            logger.debug("classifier epoch %d: loss %.6f", epoch, history[-1])

    if history:
        RunAnalytics().log_event("MLP_TRAINED", "classifier", {"epochs": epochs, "final_loss": history[-1]})
        logger.info("classifier: %d epochs, loss %.6f -> %.6f", epochs, history[0], history[-1])
    return trained, history


def predict(model: MlpModel, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        tuple: (scores, labels). For two classes scores is the class-1 probability per
        row and labels are 1 where score >= 0.5; otherwise scores is (rows, n) and
        labels the arg-max.
    """
    probs = forward(model, features)[-1]
    if model.n_classes == 2:
        scores = probs[:, 0]
        return scores, (scores >= THRESHOLD).astype(np.int64)
    return probs, np.argmax(probs, axis=1).astype(np.int64)


def accuracy(model: MlpModel, features: np.ndarray, labels: np.ndarray) -> float:
    _, predicted = predict(model, features)
    return float(np.mean(predicted == np.asarray(labels)))
