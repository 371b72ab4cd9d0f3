from .base import BaseActivation
from .factory import ActivationFactory
from .matrix import DTYPE, Matrix, Rng, as_matrix, ensure_finite, make_rng, matmul, random_uniform, zeros
from .providers import Linear, Sigmoid, Tanh


def apply_activation(m: Matrix, activation) -> Matrix:
    """Elementwise activation of a finite matrix; accepts a name, tag, or instance."""
    m = ensure_finite(as_matrix(m))
    return ActivationFactory.get_activation(activation).forward(m)
