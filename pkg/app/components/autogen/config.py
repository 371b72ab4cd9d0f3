"""
Training Hyperparameters.

Every free knob of the class-representative objective and its optimizer lives in
`TrainConfig`. None of the defaults below come from published settings; they are
chosen so 16x16 and 24x24 synthetic runs train stably with the default sigmoid
activation:

    lambda_same = lambda_other = 0.1
    learning_rate = 0.005      (plain full-batch gradient descent)
    iterations = 200
    init_scale = 1.0           (weights ~ U[-s/sqrt(fan_in), +s/sqrt(fan_in)])

`lambda_same` and `lambda_other` take either one value for every class or one value
per class index. A sample of class s is pulled toward mean_s with weight
`lambda_same[s]` and pushed away from each other mean_i with weight `lambda_other[i]`.
"""

from dataclasses import dataclass, replace
from typing import Sequence, Tuple, Union

import numpy as np

from app.components.numkit import ActivationFactory
from app.errors import ParameterError

LambdaSpec = Union[float, Tuple[float, ...]]


def _normalize_lambda(value, name: str) -> LambdaSpec:
    if isinstance(value, (list, tuple, np.ndarray)):
        values = tuple(float(v) for v in value)
        if not values:
            raise ParameterError(f"{name} must not be an empty list")
        if any(v < 0 or not np.isfinite(v) for v in values):
            raise ParameterError(f"{name} values must be finite and non-negative, got {values}")
        return values
    value = float(value)
    if value < 0 or not np.isfinite(value):
        raise ParameterError(f"{name} must be finite and non-negative, got {value}")
    return value


def _resolve(value: LambdaSpec, n_classes: int, name: str) -> np.ndarray:
    if isinstance(value, tuple):
        if len(value) != n_classes:
            raise ParameterError(f"{name} has {len(value)} entries but the data has {n_classes} classes")
        return np.array(value, dtype=np.float64)
    return np.full(n_classes, value, dtype=np.float64)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters for training or fine-tuning one autoencoder layer.

    Attributes:
        lambda_same: Intra-class weight(s), >= 0.
        lambda_other: Inter-class weight(s), >= 0.
        learning_rate (float): Gradient descent step size; 0 freezes the weights.
        iterations (int): Full passes over the data, >= 1.
        batch_size (int): 0 for full-batch descent, otherwise minibatch size.
        seed (int): Seeds weight initialization and minibatch shuffling.
        init_scale (float): Scale of the uniform weight initialization, > 0.
        activation (str): Encoder nonlinearity name.
        divergence_limit (float): Abort when |loss| exceeds this.
    """

    lambda_same: LambdaSpec = 0.1
    lambda_other: LambdaSpec = 0.1
    learning_rate: float = 0.005
    iterations: int = 200
    batch_size: int = 0
    seed: int = 0
    init_scale: float = 1.0
    activation: str = "sigmoid"
    divergence_limit: float = 1e12

    def __post_init__(self):
        object.__setattr__(self, "lambda_same", _normalize_lambda(self.lambda_same, "lambda_same"))
        object.__setattr__(self, "lambda_other", _normalize_lambda(self.lambda_other, "lambda_other"))
        if not self.learning_rate >= 0:
            raise ParameterError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be at least 1, got {self.iterations}")
        if self.batch_size < 0:
            raise ParameterError(f"batch_size must be 0 (full batch) or positive, got {self.batch_size}")
        if not self.init_scale > 0:
            raise ParameterError(f"init_scale must be positive, got {self.init_scale}")
        if not self.divergence_limit > 0:
            raise ParameterError(f"divergence_limit must be positive, got {self.divergence_limit}")
        ActivationFactory.get_activation(self.activation)

    @property
    def full_batch(self) -> bool:
        return self.batch_size == 0

    @property
    def has_class_terms(self) -> bool:
        values = []
        for spec in (self.lambda_same, self.lambda_other):
            values.extend(spec if isinstance(spec, tuple) else (spec,))
        return any(v != 0.0 for v in values)

    def same_weights(self, n_classes: int) -> np.ndarray:
        return _resolve(self.lambda_same, n_classes, "lambda_same")

    def other_weights(self, n_classes: int) -> np.ndarray:
        return _resolve(self.lambda_other, n_classes, "lambda_other")

    def plain(self) -> "TrainConfig":
        """The same run with both class terms switched off (a plain autoencoder)."""
        return replace(self, lambda_same=0.0, lambda_other=0.0)

    def with_lambdas(self, same: Union[float, Sequence[float]], other: Union[float, Sequence[float]]) -> "TrainConfig":
        return replace(self, lambda_same=same, lambda_other=other)
