"""
Feature-Space Reports and Image Export.

`distance_report` measures how well a trained stack separates the classes: for every
(sample class c, mean class k) pair, the average Euclidean distance between the hidden
representations of class-c samples and the class-k mean. The diagonal is the
intra-class spread, the off-diagonal the distance to the other classes.

The exporters write 8-bit PGM images (pixel byte = round(clamp(v, 0, 1) * 255)) of
inputs, their reconstructions, decoded class means, and pixel-space class averages.
"""

import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.components.autogen import AutoencoderLayer, ClassMeans, decode_stack, extract_features, reconstruct_stack
from app.components.data import LabeledDataset, write_pgm
from app.errors import ParameterError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DistanceReport:
    matrix: np.ndarray
    counts: np.ndarray

    @property
    def intra(self) -> np.ndarray:
        """Mean distance of each class's samples to their own class mean."""
        return np.diag(self.matrix).copy()

    @property
    def inter(self) -> np.ndarray:
        """Mean distance of each class's samples to the other class means."""
        n = self.matrix.shape[0]
        if n < 2:
            return np.zeros(n)
        off = self.matrix[~np.eye(n, dtype=bool)].reshape(n, n - 1)
        return off.mean(axis=1)

    def separation_ratio(self) -> float:
        """Mean intra-class distance over mean distance to other-class means; lower is better."""
        return float(np.mean(self.intra) / np.mean(self.inter))

    def to_frame(self, class_names: Sequence[str] = ()) -> pd.DataFrame:
        n = self.matrix.shape[0]
        names = list(class_names) if class_names else [str(c) for c in range(n)]
        frame = pd.DataFrame(self.matrix, index=names, columns=[f"to_mean_{c}" for c in names])
        frame["intra"] = self.intra
        frame["inter"] = self.inter
        return frame


def distance_report(layers: Sequence[AutoencoderLayer], data: LabeledDataset) -> DistanceReport:
    """
    Per-class distances in the top layer's hidden space.

    Class means are taken over `data` itself.
    """
    if isinstance(layers, AutoencoderLayer):
        layers = [layers]
    hidden = extract_features(layers, data.samples)
    counts = data.class_counts()
    if np.any(counts == 0):
        raise ParameterError(f"class {int(np.flatnonzero(counts == 0)[0])} has no samples")

    means = np.vstack([hidden[data.labels == c].mean(axis=0) for c in range(data.n_classes)])
    matrix = np.zeros((data.n_classes, data.n_classes))
    for c in range(data.n_classes):
        rows = hidden[data.labels == c]
        for k in range(data.n_classes):
            matrix[c, k] = np.mean(np.sqrt(np.sum((rows - means[k]) ** 2, axis=1)))
    return DistanceReport(matrix=matrix, counts=counts)


def to_pixel_bytes(image: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def _write(path: str, image: np.ndarray) -> str:
    try:
        write_pgm(path, image)
    except OSError as e:
        raise OSError(f"cannot write image {path}: {e.strerror or e}") from e
    return path


def export_reconstructions(layers: Sequence[AutoencoderLayer], samples: np.ndarray, image_shape: Tuple[int, int],
                           out_dir: str, means: Optional[ClassMeans] = None) -> List[str]:
    """
    Writes `input_XXXX.pgm` / `recon_XXXX.pgm` per sample, plus `mean_class_<c>.pgm`
    for every decoded class mean when `means` (top-layer hidden space) is given.

    Returns:
        list: Paths written, in order.
    """
    if isinstance(layers, AutoencoderLayer):
        layers = [layers]
    height, width = image_shape
    if layers[0].input_dim != height * width:
        raise ShapeError(f"image shape {height}x{width} does not match the model's {layers[0].input_dim} inputs")
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, layers[0].input_dim)
    os.makedirs(out_dir, exist_ok=True)

    written = []
    recon = reconstruct_stack(layers, samples)
    for i, (original, rebuilt) in enumerate(zip(samples, recon)):
        written.append(_write(os.path.join(out_dir, f"input_{i:04d}.pgm"), original.reshape(height, width)))
        written.append(_write(os.path.join(out_dir, f"recon_{i:04d}.pgm"), rebuilt.reshape(height, width)))

    if means is not None:
        decoded = decode_stack(layers, means.means)
        for c, image in enumerate(decoded):
            written.append(_write(os.path.join(out_dir, f"mean_class_{c}.pgm"), image.reshape(height, width)))

    logger.info("Exported %d images to %s", len(written), out_dir)
    return written


def export_class_mean_images(data: LabeledDataset, out_dir: str) -> List[str]:
    """Writes the pixel-space average image of every class as `pixel_mean_<c>.pgm`."""
    if data.image_shape is None:
        raise ParameterError("dataset has no image shape")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for c in range(data.n_classes):
        rows = data.rows_of_class(c)
        if rows.shape[0] == 0:
            continue
        path = os.path.join(out_dir, f"pixel_mean_{c}.pgm")
        written.append(_write(path, rows.mean(axis=0).reshape(data.image_shape)))
    return written
