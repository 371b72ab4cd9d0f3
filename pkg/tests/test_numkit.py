import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.components.numkit import (
    ActivationFactory,
    Linear,
    Sigmoid,
    Tanh,
    apply_activation,
    make_rng,
    matmul,
    random_uniform,
)
from app.errors import ParameterError, ShapeError


def test_matmul_known_product():
    out = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[5.0], [6.0]]))
    assert out.tolist() == [[17.0], [39.0]]


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError, match="2x3 by 4x4"):
        matmul(np.ones((2, 3)), np.ones((4, 4)))


def test_sigmoid_values():
    s = Sigmoid().forward(np.array([0.0, 1.0]))
    assert s[0] == 0.5
    assert s[1] == pytest.approx(0.7310585786300049, abs=1e-15)


def test_sigmoid_extremes_stay_finite_and_bounded():
    s = Sigmoid().forward(np.array([-1e6, -600.0, 600.0, 1e6]))
    assert np.all(np.isfinite(s))
    assert np.all((s >= 0.0) & (s <= 1.0))


def test_activation_derivatives():
    pre = np.array([-1.0, 0.0, 2.0])
    for act in (Sigmoid(), Tanh(), Linear()):
        out = act.forward(pre)
        h = 1e-6
        numeric = (act.forward(pre + h) - act.forward(pre - h)) / (2 * h)
        assert np.allclose(act.derivative(pre, out), numeric, atol=1e-8)


def test_factory_by_name_and_tag():
    assert ActivationFactory.get_activation("SIGMOID") == Sigmoid()
    assert ActivationFactory.get_activation(1) == Tanh()
    assert ActivationFactory.names() == ["linear", "sigmoid", "tanh"]
    with pytest.raises(ParameterError):
        ActivationFactory.get_activation("relu")
    with pytest.raises(ParameterError):
        ActivationFactory.get_activation(9)


def test_apply_activation_rejects_nan():
    with pytest.raises(ParameterError):
        apply_activation(np.array([[np.nan]]), "sigmoid")
    assert apply_activation(np.zeros((2, 2)), "tanh").tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_uniform_matches_raw_pcg64_stream():
    seed = 1234
    m = random_uniform(make_rng(seed), 3, 4, -2.0, 5.0)

    raw = np.random.PCG64(seed).random_raw(12)
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    expected = (-2.0 + 7.0 * u).reshape(3, 4)
    assert np.array_equal(m, expected)


def test_uniform_bounds_and_errors():
    m = random_uniform(make_rng(0), 50, 50, -0.25, 0.25)
    assert m.min() >= -0.25 and m.max() < 0.25
    with pytest.raises(ParameterError):
        random_uniform(make_rng(0), 2, 2, 1.0, 1.0)


def test_same_seed_same_stream():
    a = random_uniform(make_rng(99), 4, 4, 0.0, 1.0)
    b = random_uniform(make_rng(99), 4, 4, 0.0, 1.0)
    assert np.array_equal(a, b)
    with pytest.raises(ParameterError):
        make_rng(-1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2 ** 32))
def test_matmul_associative(p, q, r, s, seed):
    rng = make_rng(seed)
    a = random_uniform(rng, p, q, -1.0, 1.0)
    b = random_uniform(rng, q, r, -1.0, 1.0)
    c = random_uniform(rng, r, s, -1.0, 1.0)
    assert np.allclose(matmul(matmul(a, b), c), matmul(a, matmul(b, c)), rtol=1e-12, atol=1e-12)
