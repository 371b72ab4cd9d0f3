"""
Labeled Dataset Container.

A `LabeledDataset` is the unit of training and evaluation: one flattened image (or
feature vector) per row, an integer class label per row, and optional bookkeeping
(class names, per-row sample ids, per-row subject ids, the original image shape).

The module also holds the set-level operations: concatenation for multi-spectrum
training, seeded train/test splitting (optionally subject-exclusive) and per-class
subsampling to balance training partitions.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from app.components.numkit import as_matrix, make_rng
from app.errors import DatasetError, ParameterError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledDataset:
    """
    Sample matrix plus class labels.

    Attributes:
        samples (np.ndarray): rows x dim float64 matrix, one sample per row.
        labels (np.ndarray): int64 class index per row.
        n_classes (int): Number of classes; every label is below it.
        class_names (tuple): Optional display name per class index.
        sample_ids (tuple): Optional identifier per row (e.g. the image path).
        subject_ids (tuple): Optional subject identifier per row.
        image_shape (tuple): Optional (height, width) the rows were flattened from.
    """

    samples: np.ndarray
    labels: np.ndarray
    n_classes: int
    class_names: Tuple[str, ...] = ()
    sample_ids: Tuple[str, ...] = ()
    subject_ids: Tuple[str, ...] = ()
    image_shape: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1 and samples.size == 0:
            samples = samples.reshape(0, 0)
        samples = as_matrix(samples, "samples") if samples.ndim != 2 else np.ascontiguousarray(samples)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        if self.image_shape is not None:
            object.__setattr__(self, "image_shape", (int(self.image_shape[0]), int(self.image_shape[1])))

        if labels.shape[0] != samples.shape[0]:
            raise ShapeError(f"{labels.shape[0]} labels for {samples.shape[0]} samples")
        if self.n_classes < 1:
            raise DatasetError(f"n_classes must be at least 1, got {self.n_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise DatasetError(f"labels must lie in [0, {self.n_classes}), got range "
                               f"[{labels.min()}, {labels.max()}]")
        if self.class_names and len(self.class_names) != self.n_classes:
            raise DatasetError(f"{len(self.class_names)} class names for {self.n_classes} classes")
        for name, ids in (("sample_ids", self.sample_ids), ("subject_ids", self.subject_ids)):
            if ids and len(ids) != samples.shape[0]:
                raise ShapeError(f"{len(ids)} {name} for {samples.shape[0]} samples")
        if self.image_shape is not None and samples.shape[0] and \
                self.image_shape[0] * self.image_shape[1] != samples.shape[1]:
            raise ShapeError(f"image shape {self.image_shape} does not match sample length {samples.shape[1]}")

    @property
    def rows(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.rows

    def validate(self, unit_range: bool = True) -> "LabeledDataset":
        """
        Checks value-level invariants.

        Args:
            unit_range (bool): Also require every value to lie in [0, 1] (image data).

        Raises:
            DatasetError: On non-finite values or out-of-range pixels.
        """
        if not np.all(np.isfinite(self.samples)):
            raise DatasetError("dataset contains NaN or Inf values")
        if unit_range and self.samples.size and (self.samples.min() < 0.0 or self.samples.max() > 1.0):
            raise DatasetError(f"pixel values must lie in [0, 1], got range "
                               f"[{self.samples.min()}, {self.samples.max()}]")
        return self

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def rows_of_class(self, class_index: int) -> np.ndarray:
        return self.samples[self.labels == class_index]

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        """Returns the rows at `indices`, in that order, with their ids carried along."""
        idx = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            samples=self.samples[idx],
            labels=self.labels[idx],
            sample_ids=tuple(self.sample_ids[i] for i in idx) if self.sample_ids else (),
            subject_ids=tuple(self.subject_ids[i] for i in idx) if self.subject_ids else (),
        )

    def with_samples(self, samples: np.ndarray, image_shape=None) -> "LabeledDataset":
        """Same labels and ids over a new sample matrix (e.g. extracted features)."""
        return replace(self, samples=samples, image_shape=image_shape)

    def name_of(self, class_index: int) -> str:
        if self.class_names:
            return self.class_names[class_index]
        return str(class_index)


def empty_like(data: LabeledDataset) -> LabeledDataset:
    return data.subset([])


def concat(a: LabeledDataset, b: LabeledDataset) -> LabeledDataset:
    """
    Row-wise concatenation of two datasets.

    When both carry class names, labels of `b` are remapped by name onto `a`'s
    indices and names only present in `b` are appended. Without names, indices are
    taken as-is and the class count is the larger of the two.

    Raises:
        ShapeError: If the sample dimensionalities differ.
        DatasetError: If exactly one side carries class names.
    """
    if a.rows == 0 and not a.class_names and b.rows:
        return b
    if b.rows == 0:
        return a
    if a.dim != b.dim:
        raise ShapeError(f"cannot concatenate datasets of dimension {a.dim} and {b.dim}")
    if bool(a.class_names) != bool(b.class_names):
        raise DatasetError("cannot concatenate a named dataset with an unnamed one")

    if a.class_names:
        names = list(a.class_names)
        for name in b.class_names:
            if name not in names:
                names.append(name)
        mapping = np.array([names.index(name) for name in b.class_names], dtype=np.int64)
        b_labels = mapping[b.labels]
        n_classes = len(names)
    else:
        names = []
        b_labels = b.labels
        n_classes = max(a.n_classes, b.n_classes)

    image_shape = a.image_shape if a.image_shape == b.image_shape else None

    def _ids(x, y, attr):
        xs, ys = getattr(x, attr), getattr(y, attr)
        if x.rows == 0:
            return ys
        if xs and ys:
            return xs + ys
        return ()

    return LabeledDataset(
        samples=np.vstack([a.samples, b.samples]),
        labels=np.concatenate([a.labels, b_labels]),
        n_classes=n_classes,
        class_names=tuple(names),
        sample_ids=_ids(a, b, "sample_ids"),
        subject_ids=_ids(a, b, "subject_ids"),
        image_shape=image_shape,
    )


def split(data: LabeledDataset, train_fraction: float, seed: int,
          subject_ids: Optional[Sequence[str]] = None) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Seeded shuffle-then-split into (train, test).

    With subject ids (callers usually pass `data.subject_ids`), whole subjects are
    assigned to one side so no subject appears in both partitions; the fraction then
    applies to the number of subjects.

    Raises:
        ParameterError: If `train_fraction` is not strictly between 0 and 1.
        DatasetError: If a class ends up absent from either partition.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie strictly between 0 and 1, got {train_fraction}")
    rng = make_rng(seed)

    if subject_ids is not None and len(subject_ids):
        if len(subject_ids) != data.rows:
            raise ShapeError(f"{len(subject_ids)} subject ids for {data.rows} samples")
        subjects = sorted(set(subject_ids))
        order = rng.permutation(len(subjects))
        n_train = int(round(train_fraction * len(subjects)))
        train_subjects = {subjects[i] for i in order[:n_train]}
        train_idx = [i for i, s in enumerate(subject_ids) if s in train_subjects]
        test_idx = [i for i, s in enumerate(subject_ids) if s not in train_subjects]
    else:
        order = rng.permutation(data.rows)
        n_train = int(round(train_fraction * data.rows))
        train_idx = sorted(order[:n_train].tolist())
        test_idx = sorted(order[n_train:].tolist())

    train, test = data.subset(train_idx), data.subset(test_idx)
    for name, part in (("train", train), ("test", test)):
        missing = [c for c, n in enumerate(part.class_counts()) if n == 0]
        if missing:
            raise DatasetError(f"class {data.name_of(missing[0])} is absent from the {name} partition")
    logger.debug("Split %d rows into %d train / %d test", data.rows, train.rows, test.rows)
    return train, test


def balance_classes(data: LabeledDataset, seed: int, per_class: Optional[int] = None) -> LabeledDataset:
    """
    Subsamples every class to the same count.

    Args:
        per_class (int, optional): Target count; defaults to the smallest class size.

    Raises:
        DatasetError: If a class has fewer rows than `per_class`.
    """
    counts = data.class_counts()
    target = int(counts.min()) if per_class is None else per_class
    rng = make_rng(seed)
    keep = []
    for c in range(data.n_classes):
        idx = np.flatnonzero(data.labels == c)
        if idx.size < target:
            raise DatasetError(f"class {data.name_of(c)} has {idx.size} samples, fewer than {target}")
        keep.extend(rng.choice(idx, size=target, replace=False).tolist())
    return data.subset(sorted(keep))
