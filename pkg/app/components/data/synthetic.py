"""
Synthetic Two-Class Face Stand-In.

Generates small grayscale "faces" for desk-scale experiments: each class is a smooth
template pattern plus Gaussian pixel noise, clamped to [0, 1].

Templates, with u, v the pixel-centre coordinates in [0, 1):
    base(u, v)  = 0.5 + 0.15 * cos(2*pi*u) * cos(2*pi*v)
    diff(u, v)  = sin(2*pi*(u + template_shift)) * sin(pi*v)
    class 0     = base - contrast * class_separation / 2 * diff
    class 1     = base + contrast * class_separation / 2 * diff
`contrast` is 1.0 for the visible spectrum and 0.5 for NIR, which compresses the class
difference the way NIR imagery shows less gender variation. A `template_shift` of 0.25
turns the discriminative pattern by a quarter period, giving a related target domain
whose class difference is orthogonal to the source domain's.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.components.numkit import make_rng
from app.errors import ParameterError

from .dataset import LabeledDataset

logger = logging.getLogger(__name__)

SPECTRA = {"visible": 1.0, "nir": 0.5}
CLASS_NAMES = ("male", "female")


@dataclass(frozen=True)
class SynthSpec:
    resolution: int = 16
    per_class: int = 200
    class_separation: float = 0.4
    noise_sigma: float = 0.1
    seed: int = 7
    template_shift: float = 0.0
    spectrum: str = "visible"

    def validate(self) -> "SynthSpec":
        if self.resolution < 4:
            raise ParameterError(f"resolution must be at least 4, got {self.resolution}")
        if self.per_class < 1:
            raise ParameterError(f"per_class must be at least 1, got {self.per_class}")
        if self.class_separation < 0:
            raise ParameterError(f"class_separation must be non-negative, got {self.class_separation}")
        if self.noise_sigma < 0:
            raise ParameterError(f"noise_sigma must be non-negative, got {self.noise_sigma}")
        if self.spectrum not in SPECTRA:
            raise ParameterError(f"spectrum must be one of {sorted(SPECTRA)}, got {self.spectrum!r}")
        return self


def class_templates(spec: SynthSpec) -> np.ndarray:
    """Returns the (2, resolution * resolution) noise-free class templates."""
    side = spec.resolution
    coords = (np.arange(side, dtype=np.float64) + 0.5) / side
    v, u = np.meshgrid(coords, coords, indexing="ij")
    base = 0.5 + 0.15 * np.cos(2 * np.pi * u) * np.cos(2 * np.pi * v)
    diff = np.sin(2 * np.pi * (u + spec.template_shift)) * np.sin(np.pi * v)
    half = SPECTRA[spec.spectrum] * spec.class_separation / 2.0
    return np.vstack([(base - half * diff).reshape(-1), (base + half * diff).reshape(-1)])


def generate_synthetic(spec: SynthSpec) -> LabeledDataset:
    """
    Draws `per_class` noisy samples per class, class 0 rows first.

    Deterministic from `spec.seed`.
    """
    spec.validate()
    rng = make_rng(spec.seed)
    templates = class_templates(spec)
    dim = templates.shape[1]

    rows, labels = [], []
    for c in range(2):
        noise = rng.standard_normal((spec.per_class, dim))
        rows.append(np.clip(templates[c] + spec.noise_sigma * noise, 0.0, 1.0))
        labels.append(np.full(spec.per_class, c, dtype=np.int64))

    prefix = f"{spec.spectrum}-s{spec.seed}"
    logger.debug("Generated %d synthetic %dx%d samples (%s)", 2 * spec.per_class, spec.resolution,
                 spec.resolution, spec.spectrum)
    return LabeledDataset(
        samples=np.vstack(rows),
        labels=np.concatenate(labels),
        n_classes=2,
        class_names=CLASS_NAMES,
        sample_ids=tuple(f"{prefix}-{i:05d}" for i in range(2 * spec.per_class)),
        # one synthetic subject per pair of consecutive draws within a class
        subject_ids=tuple(f"{prefix}-c{i // spec.per_class}-subj{(i % spec.per_class) // 2}"
                          for i in range(2 * spec.per_class)),
        image_shape=(spec.resolution, spec.resolution),
    )
