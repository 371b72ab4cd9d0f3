"""
Unified Activation Interface.

Every elementwise nonlinearity used by the autoencoder and the classifier implements
this abstract base, so layers can hold "an activation" without caring which one.
"""

from abc import ABC, abstractmethod

import numpy as np


class BaseActivation(ABC):
    """
    Abstract base class for elementwise activations.

    Subclasses expose a stable `name` (used in config files) and a one-byte `tag`
    (used in the binary model container).
    """

    name: str = ""
    tag: int = -1

    @abstractmethod
    def forward(self, pre: np.ndarray) -> np.ndarray:
        """
        Applies the activation elementwise.

        Args:
            pre (np.ndarray): Pre-activation values of any shape.

        Returns:
            np.ndarray: Activated values, same shape.
        """
        pass

    @abstractmethod
    def derivative(self, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
        """
        Elementwise derivative with respect to the pre-activation.

        Args:
            pre (np.ndarray): Pre-activation values.
            out (np.ndarray): The matching `forward(pre)` result, reused where cheaper.

        Returns:
            np.ndarray: d out / d pre, same shape.
        """
        pass

    def __eq__(self, other) -> bool:
        return isinstance(other, BaseActivation) and other.tag == self.tag

    def __hash__(self) -> int:
        return hash(self.tag)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"
