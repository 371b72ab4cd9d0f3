"""Shared pytest fixtures."""

import numpy as np
import pytest

from app.components.autogen import TrainConfig, init_layer
from app.components.data import LabeledDataset, SynthSpec, generate_synthetic
from app.components.numkit import make_rng
from app.services import RunAnalytics


@pytest.fixture(autouse=True)
def clean_analytics():
    RunAnalytics().reset()
    yield
    RunAnalytics().reset()


@pytest.fixture
def tiny_data():
    """Two classes, six samples each, eight features in [0, 1)."""
    rng = make_rng(11)
    return LabeledDataset(
        samples=rng.random((12, 8)),
        labels=np.repeat([0, 1], 6),
        n_classes=2,
        class_names=("male", "female"),
        sample_ids=tuple(f"s{i:02d}" for i in range(12)),
    )


@pytest.fixture
def three_class_data():
    rng = make_rng(5)
    return LabeledDataset(samples=rng.random((15, 6)), labels=np.tile([0, 1, 2], 5), n_classes=3)


@pytest.fixture
def tiny_layer():
    return init_layer(8, 5, make_rng(3))


@pytest.fixture
def small_synth():
    """8x8 synthetic set, 30 samples per class."""
    return generate_synthetic(SynthSpec(resolution=8, per_class=30, seed=1))


@pytest.fixture(scope="session")
def default_synth():
    """The default 16x16, 200-per-class synthetic set (seed 7)."""
    return generate_synthetic(SynthSpec())


@pytest.fixture
def quick_cfg():
    return TrainConfig(iterations=20, learning_rate=0.01, seed=3)
