import numpy as np
import pytest

from app.components.autogen import (
    AutoencoderLayer,
    decode,
    encode,
    extract_features,
    init_layer,
    reconstruct,
    reconstruct_stack,
)
from app.components.numkit import Linear, Sigmoid, make_rng
from app.errors import ShapeError


def test_encode_and_reconstruct_known_values():
    layer = AutoencoderLayer(np.array([[1.0, -1.0]]), np.array([[2.0], [0.0]]))
    hidden = encode(layer, np.array([2.0, 1.0]))
    assert hidden.shape == (1, 1)
    assert hidden[0, 0] == pytest.approx(0.7310585786300049, abs=1e-15)
    assert reconstruct(layer, np.array([2.0, 1.0]))[0].tolist() == pytest.approx([1.4621171572600098, 0.0])


def test_linear_identity_layer_reconstructs_exactly():
    layer = AutoencoderLayer(np.eye(3), np.eye(3), Linear())
    x = np.array([[0.1, 0.5, 0.9], [0.0, 1.0, 0.3]])
    assert np.array_equal(reconstruct(layer, x), x)


def test_mismatched_weights_are_rejected():
    with pytest.raises(ShapeError):
        AutoencoderLayer(np.ones((3, 4)), np.ones((3, 4)))


def test_encode_rejects_wrong_width(tiny_layer):
    with pytest.raises(ShapeError, match="expects 8"):
        encode(tiny_layer, np.ones((2, 7)))
    with pytest.raises(ShapeError):
        decode(tiny_layer, np.ones((2, 4)))


def test_init_layer_bounds_and_order():
    layer = init_layer(16, 4, make_rng(2), init_scale=0.5)
    assert layer.encoder_weights.shape == (4, 16)
    assert layer.decoder_weights.shape == (16, 4)
    assert np.abs(layer.encoder_weights).max() < 0.5 / 4.0
    assert np.abs(layer.decoder_weights).max() < 0.5 / 2.0
    assert layer.activation == Sigmoid()

    again = init_layer(16, 4, make_rng(2), init_scale=0.5)
    assert layer.same_weights_as(again)
    # W_e is drawn first from the stream
    first = make_rng(2).random((4, 16))
    assert np.array_equal(layer.encoder_weights, -0.125 + 0.25 * first)


def test_stack_shapes(tiny_data):
    rng = make_rng(4)
    layers = [init_layer(8, 6, rng), init_layer(6, 3, rng)]
    assert extract_features(layers, tiny_data.samples).shape == (12, 3)
    assert reconstruct_stack(layers, tiny_data.samples).shape == (12, 8)
