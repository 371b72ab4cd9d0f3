"""
Concrete Activation Implementations.

Sigmoid, tanh and the identity. Sigmoid clips its input to +-500 so `exp` never
overflows; outside that range the result is already 0.0 or 1.0 in float64.
"""

import numpy as np

from .base import BaseActivation


class Sigmoid(BaseActivation):
    """Logistic function, output in (0, 1)."""

    name = "sigmoid"
    tag = 0

    def forward(self, pre: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-np.clip(pre, -500.0, 500.0)))

    def derivative(self, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
        return out * (1.0 - out)


class Tanh(BaseActivation):
    """Hyperbolic tangent, output in (-1, 1)."""

    name = "tanh"
    tag = 1

    def forward(self, pre: np.ndarray) -> np.ndarray:
        return np.tanh(pre)

    def derivative(self, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
        return 1.0 - out * out


class Linear(BaseActivation):
    """Identity."""

    name = "linear"
    tag = 2

    def forward(self, pre: np.ndarray) -> np.ndarray:
        return pre

    def derivative(self, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
        return np.ones_like(pre)
