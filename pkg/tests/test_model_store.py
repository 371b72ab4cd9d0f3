import struct

import numpy as np
import pytest

from app.components.autogen import TrainConfig, stack_class_means, stack_train
from app.components.classifier import build_default
from app.errors import ModelFormatError
from app.model_store import ModelBundle, load_model, model_from_bytes, model_to_bytes, save_model


@pytest.fixture
def bundle(small_synth):
    layers = stack_train(small_synth, [32, 16], TrainConfig(iterations=3, seed=2, activation="tanh"))
    return ModelBundle(
        layers=layers,
        means=stack_class_means(layers, small_synth),
        classifier=build_default(16, seed=4),
        image_shape=(8, 8),
        class_names=("male", "female"),
    )


def test_round_trip_is_bit_exact(tmp_path, bundle):
    path = tmp_path / "model.crae"
    save_model(bundle, str(path))
    raw = path.read_bytes()
    assert raw[:4] == b"CRAE"
    assert struct.unpack_from("<II", raw, 4) == (1, 2)

    loaded = load_model(str(path))
    for a, b in zip(loaded.layers, bundle.layers):
        assert a.same_weights_as(b)
    for a, b in zip(loaded.means, bundle.means):
        assert np.array_equal(a.means, b.means)
    assert loaded.classifier.same_weights_as(bundle.classifier)
    assert loaded.image_shape == (8, 8)
    assert loaded.class_names == ("male", "female")
    assert model_to_bytes(loaded) == raw


def test_bundle_without_classifier_or_means(bundle):
    bare = ModelBundle(layers=bundle.layers)
    loaded = model_from_bytes(model_to_bytes(bare))
    assert loaded.classifier is None
    assert loaded.means == [None, None]
    assert loaded.image_shape is None


def test_multiclass_classifier_survives(bundle):
    bundle.classifier = build_default(16, n_classes=3)
    loaded = model_from_bytes(model_to_bytes(bundle))
    assert loaded.classifier.n_classes == 3
    assert loaded.classifier.layers[-1].activation == "softmax"


def test_corrupt_containers_are_rejected(bundle):
    raw = model_to_bytes(bundle)
    with pytest.raises(ModelFormatError, match="magic"):
        model_from_bytes(b"NOPE" + raw[4:])
    with pytest.raises(ModelFormatError, match="version"):
        model_from_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
    with pytest.raises(ModelFormatError, match="unexpected end"):
        model_from_bytes(raw[:-10])
    with pytest.raises(ModelFormatError, match="trailing"):
        model_from_bytes(raw + b"\x00")
    with pytest.raises(ModelFormatError, match="activation tag"):
        model_from_bytes(raw[:12] + b"\x07" + raw[13:])
