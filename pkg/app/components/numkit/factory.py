"""
Activation Factory.

Lets config files and the model container ask for an activation by name
("sigmoid") or by its binary tag (0) without importing the concrete classes.
"""

from typing import Union

from app.errors import ParameterError

from .base import BaseActivation
from .providers import Linear, Sigmoid, Tanh


class ActivationFactory:
    """
    Factory class for creating activation instances.
    """

    _providers = {cls.name: cls for cls in (Sigmoid, Tanh, Linear)}

    @staticmethod
    def get_activation(key: Union[str, int, BaseActivation]) -> BaseActivation:
        """
        Returns the activation for a name, a container tag, or an existing instance.

        Args:
            key: "sigmoid" / "tanh" / "linear" (case-insensitive), a tag 0-2, or an instance.

        Raises:
            ParameterError: If the key is not a supported activation.
        """
        if isinstance(key, BaseActivation):
            return key
        if isinstance(key, int):
            for cls in ActivationFactory._providers.values():
                if cls.tag == key:
                    return cls()
            raise ParameterError(f"Unsupported activation tag: {key}")

        activation_class = ActivationFactory._providers.get(str(key).strip().lower())
        if not activation_class:
            supported = ", ".join(sorted(ActivationFactory._providers))
            raise ParameterError(f"Unsupported activation: {key} (expected one of {supported})")
        return activation_class()

    @staticmethod
    def names() -> list:
        return sorted(ActivationFactory._providers)
