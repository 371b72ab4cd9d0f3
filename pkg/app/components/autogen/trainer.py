"""
Autoencoder Trainer.

Plain gradient descent on the class-representative objective:

    W <- W - learning_rate * dE/dW

Each iteration first recomputes the class means under the current weights, records the
full-data loss, then steps. In minibatch mode the means are refreshed once per pass
over the data, not per minibatch.

Deeper models are built greedily: layer j is trained to completion on the hidden
representations produced by layers 1..j-1, with class means computed in its own
hidden space.
"""

import logging
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.components.data import LabeledDataset
from app.components.numkit import Rng, make_rng
from app.errors import DivergenceError, ParameterError, ShapeError
from app.services.analytics import RunAnalytics

from .config import TrainConfig
from .layer import AutoencoderLayer, encode, extract_features, init_layer
from .objective import ClassMeans, LossBreakdown, batch_loss, class_means, gradients

logger = logging.getLogger(__name__)


def sgd_step(layer: AutoencoderLayer, grads: Tuple[np.ndarray, np.ndarray], learning_rate: float) -> AutoencoderLayer:
    """
    One descent step; returns a new layer.

    Raises:
        ShapeError: If a gradient does not match its weight matrix.
    """
    grad_enc, grad_dec = grads
    if grad_enc.shape != layer.encoder_weights.shape or grad_dec.shape != layer.decoder_weights.shape:
        raise ShapeError(f"gradient shapes {grad_enc.shape}/{grad_dec.shape} do not match weights "
                         f"{layer.encoder_weights.shape}/{layer.decoder_weights.shape}")
    return AutoencoderLayer(
        layer.encoder_weights - learning_rate * grad_enc,
        layer.decoder_weights - learning_rate * grad_dec,
        layer.activation,
    )


def _check_divergence(total: float, iteration: int, cfg: TrainConfig, phase: str):
    if not np.isfinite(total) or abs(total) > cfg.divergence_limit:
        RunAnalytics().log_event("DIVERGED", phase, {"iteration": iteration, "loss": total})
        raise DivergenceError(
            f"{phase}: training diverged at iteration {iteration} (total loss {total!r}); "
            f"lower the learning rate or the lambda weights",
            iteration=iteration,
            value=total,
        )


def _descend(layer: AutoencoderLayer, data: LabeledDataset, cfg: TrainConfig, rng: Rng,
             phase: str, history: List[LossBreakdown]) -> AutoencoderLayer:
    for iteration in range(cfg.iterations):
        means = class_means(layer, data)
        breakdown = batch_loss(layer, data.samples, data.labels, means, cfg)
        _check_divergence(breakdown.total, iteration, cfg, phase)
        history.append(breakdown)
        logger.debug("%s iteration %d: total=%.6f recon=%.6f intra=%.6f inter=%.6f", phase, iteration,
                     breakdown.total, breakdown.reconstruction, breakdown.intra, breakdown.inter)

        if cfg.full_batch:
            layer = sgd_step(layer, gradients(layer, data, means, cfg), cfg.learning_rate)
            continue

        order = rng.permutation(data.rows)
        for start in range(0, data.rows, cfg.batch_size):
            batch = data.subset(order[start:start + cfg.batch_size])
            layer = sgd_step(layer, gradients(layer, batch, means, cfg), cfg.learning_rate)

    _check_final(layer, data, cfg, phase)
    return layer


def _check_final(layer: AutoencoderLayer, data: LabeledDataset, cfg: TrainConfig, phase: str):
    """The weights left by the last step must be finite and give an in-range loss."""
    if not (np.all(np.isfinite(layer.encoder_weights)) and np.all(np.isfinite(layer.decoder_weights))):
        _check_divergence(float("nan"), cfg.iterations, cfg, phase)
    with np.errstate(over="ignore", invalid="ignore"):
        breakdown = batch_loss(layer, data.samples, data.labels, class_means(layer, data), cfg)
    _check_divergence(breakdown.total, cfg.iterations, cfg, phase)


def _check_data(data: LabeledDataset):
    if data.rows == 0:
        raise ParameterError("cannot train on an empty dataset")


def train_layer(data: LabeledDataset, hidden_dim: Optional[int] = None,
                cfg: TrainConfig = TrainConfig(), phase: str = "layer-1") -> Tuple[AutoencoderLayer, List[LossBreakdown]]:
    """
    Trains one layer from a seeded initialization.

    Args:
        data (LabeledDataset): Training samples; every class needs at least one row.
        hidden_dim (int, optional): Hidden units; defaults to the input dimension.
        cfg (TrainConfig): Hyperparameters.
        phase (str): Label used in logs and run analytics.

    Returns:
        tuple: (trained layer, per-iteration LossBreakdown history).

    Raises:
        DivergenceError: If the loss becomes non-finite or exceeds the divergence limit.
    """
    _check_data(data)
    hidden_dim = data.dim if hidden_dim is None else hidden_dim
    if hidden_dim < 1:
        raise ParameterError(f"hidden_dim must be at least 1, got {hidden_dim}")

    rng = make_rng(cfg.seed)
    layer = init_layer(data.dim, hidden_dim, rng, cfg.activation, cfg.init_scale)
    logger.info("%s: training [%d, %d] %s layer on %d samples for %d iterations", phase, data.dim,
                hidden_dim, layer.activation.name, data.rows, cfg.iterations)

    history: List[LossBreakdown] = []
    layer = _descend(layer, data, cfg, rng, phase, history)
    RunAnalytics().log_event("LAYER_TRAINED", phase, {
        "input_dim": data.dim,
        "hidden_dim": hidden_dim,
        "iterations": cfg.iterations,
        "final_loss": history[-1].total,
    })
    logger.info("%s: final total loss %.6f", phase, history[-1].total)
    return layer, history


def fine_tune(layer: AutoencoderLayer, data: LabeledDataset, cfg: TrainConfig = TrainConfig(),
              history: Optional[List[LossBreakdown]] = None, phase: str = "fine-tune") -> AutoencoderLayer:
    """
    Continues descent from pretrained weights on new data.

    Class means are recomputed on `data`. When `history` is given, the per-iteration
    losses are appended to it.

    Raises:
        ShapeError: If the layer's input dimension does not match the data.
    """
    _check_data(data)
    if layer.input_dim != data.dim:
        raise ShapeError(f"pretrained layer expects {layer.input_dim} inputs but the data has {data.dim}")
    rng = make_rng(cfg.seed)
    sink: List[LossBreakdown] = [] if history is None else history
    start = len(sink)
    tuned = _descend(layer, data, cfg, rng, phase, sink)
    RunAnalytics().log_event("FINE_TUNED", phase, {
        "iterations": cfg.iterations,
        "samples": data.rows,
        "final_loss": sink[-1].total,
    })
    logger.info("%s: %d iterations on %d samples, loss %.6f -> %.6f", phase, cfg.iterations, data.rows,
                sink[start].total, sink[-1].total)
    return tuned


def stack_train(data: LabeledDataset, dims: Sequence[int], cfg: TrainConfig = TrainConfig(),
                histories: Optional[List[List[LossBreakdown]]] = None) -> List[AutoencoderLayer]:
    """
    Greedy layer-wise training.

    Layer 1 sees the raw samples with `cfg.seed`; layer j (1-based) sees layer j-1's
    hidden representations and is seeded with `cfg.seed + j - 1`.

    Args:
        histories (list, optional): Receives one loss history per layer.
    """
    if not dims:
        raise ParameterError("dims must name at least one hidden layer size")
    layers: List[AutoencoderLayer] = []
    current = data
    for j, hidden_dim in enumerate(dims):
        layer_cfg = replace(cfg, seed=cfg.seed + j)
        layer, history = train_layer(current, hidden_dim, layer_cfg, phase=f"layer-{j + 1}")
        layers.append(layer)
        if histories is not None:
            histories.append(history)
        current = current.with_samples(encode(layer, current.samples))
    return layers


def fine_tune_stack(layers: Sequence[AutoencoderLayer], data: LabeledDataset, cfg: TrainConfig = TrainConfig(),
                    histories: Optional[List[List[LossBreakdown]]] = None) -> List[AutoencoderLayer]:
    """Fine-tunes every layer in turn, each on the representations of the already-tuned layers below."""
    tuned: List[AutoencoderLayer] = []
    current = data
    for j, layer in enumerate(layers):
        history: List[LossBreakdown] = []
        layer = fine_tune(layer, current, replace(cfg, seed=cfg.seed + j), history, phase=f"fine-tune-{j + 1}")
        tuned.append(layer)
        if histories is not None:
            histories.append(history)
        current = current.with_samples(encode(layer, current.samples))
    return tuned


def stack_class_means(layers: Sequence[AutoencoderLayer], data: LabeledDataset) -> List[ClassMeans]:
    """Class means of every layer, each computed in that layer's hidden space."""
    out = []
    current = data
    for layer in layers:
        out.append(class_means(layer, current))
        current = current.with_samples(encode(layer, current.samples))
    return out


def features_dataset(layers: Sequence[AutoencoderLayer], data: LabeledDataset) -> LabeledDataset:
    """The dataset with its rows replaced by top-layer features."""
    return data.with_samples(extract_features(layers, data.samples))
