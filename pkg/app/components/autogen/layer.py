"""
Autoencoder Layer.

One layer holds an encoder matrix W_e (hidden x input), a decoder matrix W_d
(input x hidden) and the encoder nonlinearity phi. There are no bias vectors:

    hidden          r     = phi(x W_e^T)
    reconstruction  x_hat = r W_d^T

Samples are rows throughout. Layers are immutable; training returns new ones.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from app.components.numkit import (
    ActivationFactory,
    BaseActivation,
    Rng,
    Sigmoid,
    as_matrix,
    random_uniform,
)
from app.errors import ParameterError, ShapeError


@dataclass(frozen=True, eq=False)
class AutoencoderLayer:
    encoder_weights: np.ndarray
    decoder_weights: np.ndarray
    activation: BaseActivation = field(default_factory=Sigmoid)

    def __post_init__(self):
        w_e = as_matrix(self.encoder_weights, "encoder weights")
        w_d = as_matrix(self.decoder_weights, "decoder weights")
        if w_e.shape != (w_d.shape[1], w_d.shape[0]):
            raise ShapeError(f"encoder weights {w_e.shape[0]}x{w_e.shape[1]} do not pair with "
                             f"decoder weights {w_d.shape[0]}x{w_d.shape[1]}")
        object.__setattr__(self, "encoder_weights", w_e)
        object.__setattr__(self, "decoder_weights", w_d)
        object.__setattr__(self, "activation", ActivationFactory.get_activation(self.activation))

    @property
    def input_dim(self) -> int:
        return self.encoder_weights.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.encoder_weights.shape[0]

    def same_weights_as(self, other: "AutoencoderLayer") -> bool:
        """Bit-for-bit equality of both weight matrices and the activation."""
        return (self.activation == other.activation
                and np.array_equal(self.encoder_weights, other.encoder_weights)
                and np.array_equal(self.decoder_weights, other.decoder_weights))


def init_layer(input_dim: int, hidden_dim: int, rng: Rng, activation="sigmoid",
               init_scale: float = 1.0) -> AutoencoderLayer:
    """
    Draws W_e then W_d uniformly in [-s/sqrt(fan_in), +s/sqrt(fan_in)).

    W_e's fan-in is `input_dim`, W_d's is `hidden_dim`.
    """
    if input_dim < 1 or hidden_dim < 1:
        raise ParameterError(f"layer dimensions must be positive, got {input_dim} -> {hidden_dim}")
    enc_bound = init_scale / np.sqrt(input_dim)
    dec_bound = init_scale / np.sqrt(hidden_dim)
    w_e = random_uniform(rng, hidden_dim, input_dim, -enc_bound, enc_bound)
    w_d = random_uniform(rng, input_dim, hidden_dim, -dec_bound, dec_bound)
    return AutoencoderLayer(w_e, w_d, activation)


def _check_input(layer: AutoencoderLayer, x: np.ndarray) -> np.ndarray:
    x = as_matrix(x, "input")
    if x.shape[1] != layer.input_dim:
        raise ShapeError(f"input has {x.shape[1]} columns but the layer expects {layer.input_dim}")
    return x


def pre_activation(layer: AutoencoderLayer, x: np.ndarray) -> np.ndarray:
    return _check_input(layer, x) @ layer.encoder_weights.T


def encode(layer: AutoencoderLayer, x: np.ndarray) -> np.ndarray:
    """Hidden representation phi(x W_e^T), shape (rows, hidden_dim)."""
    return layer.activation.forward(pre_activation(layer, x))


def decode(layer: AutoencoderLayer, hidden: np.ndarray) -> np.ndarray:
    """Maps hidden vectors back to input space: hidden W_d^T."""
    hidden = as_matrix(hidden, "hidden representation")
    if hidden.shape[1] != layer.hidden_dim:
        raise ShapeError(f"hidden vectors have {hidden.shape[1]} entries but the layer has {layer.hidden_dim}")
    return hidden @ layer.decoder_weights.T


def reconstruct(layer: AutoencoderLayer, x: np.ndarray) -> np.ndarray:
    return decode(layer, encode(layer, x))


def extract_features(layers: Sequence[AutoencoderLayer], x: np.ndarray) -> np.ndarray:
    """Feeds samples through every encoder in order."""
    features = as_matrix(x, "input")
    for layer in layers:
        features = encode(layer, features)
    return features


def decode_stack(layers: Sequence[AutoencoderLayer], hidden: np.ndarray) -> np.ndarray:
    """Decodes a top-layer hidden vector down through every decoder to input space."""
    out = hidden
    for layer in reversed(layers):
        out = decode(layer, out)
    return out


def reconstruct_stack(layers: Sequence[AutoencoderLayer], x: np.ndarray) -> np.ndarray:
    return decode_stack(layers, extract_features(layers, x))
