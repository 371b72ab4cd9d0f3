"""
Classification Metrics.

Mean class-wise accuracy is the headline number: the unweighted average of per-class
accuracies, so a heavily imbalanced test set cannot hide a weak minority class.

ROC curves sweep the decision threshold over the distinct scores in descending order.
Samples sharing a score move together in one step, which makes the trapezoidal area
equal to the pair-counting estimate with ties worth one half.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.errors import DatasetError, ParameterError, ShapeError

logger = logging.getLogger(__name__)

POSITIVE_CLASS = 1


def format_percentage(ratio: float) -> str:
    """0.901 -> '90.10'."""
    return f"{100.0 * ratio:.2f}"


@dataclass(frozen=True, eq=False)
class EvalReport:
    per_class_accuracy: np.ndarray
    mean_classwise_accuracy: float
    confusion: np.ndarray
    misclassified_ids: Tuple[str, ...] = ()
    class_names: Tuple[str, ...] = ()
    positive_class: int = POSITIVE_CLASS

    @property
    def n_classes(self) -> int:
        return self.confusion.shape[0]

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    def name_of(self, c: int) -> str:
        return self.class_names[c] if self.class_names else str(c)

    def to_text(self) -> str:
        """Flat `key = value` report; accuracies as 2-decimal percentages plus exact ratios."""
        lines = [
            f"# positive_class = {self.positive_class}",
            f"n_classes = {self.n_classes}",
            f"samples = {int(self.confusion.sum())}",
            f"mean_classwise_accuracy = {format_percentage(self.mean_classwise_accuracy)}",
            f"mean_classwise_accuracy_ratio = {self.mean_classwise_accuracy!r}",
            f"overall_accuracy = {format_percentage(self.overall_accuracy)}",
        ]
        for c in range(self.n_classes):
            lines.append(f"class_{c}_name = {self.name_of(c)}")
            lines.append(f"class_{c}_samples = {int(self.confusion[c].sum())}")
            lines.append(f"class_{c}_accuracy = {format_percentage(self.per_class_accuracy[c])}")
            lines.append(f"class_{c}_accuracy_ratio = {float(self.per_class_accuracy[c])!r}")
        lines.append(f"misclassified = {len(self.misclassified_ids)}")
        for sample_id in self.misclassified_ids:
            lines.append(f"misclassified_id = {sample_id}")
        return "\n".join(lines) + "\n"

    def confusion_frame(self) -> pd.DataFrame:
        """Rows are true classes, columns predicted classes."""
        names = [self.name_of(c) for c in range(self.n_classes)]
        frame = pd.DataFrame(self.confusion, index=names, columns=names)
        frame.index.name = "true\\predicted"
        return frame


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    positive_class: int = POSITIVE_CLASS

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"fpr": self.fpr, "tpr": self.tpr})


def evaluate(predicted_labels: Sequence[int], true_labels: Sequence[int], ids: Optional[Sequence[str]] = None,
             n_classes: Optional[int] = None, class_names: Sequence[str] = (),
             positive_class: int = POSITIVE_CLASS) -> EvalReport:
    """
    Exact counting metrics.

    Args:
        ids: Optional per-sample identifiers; misclassified ones are listed in input
            order (row indices are used when omitted).
        n_classes: Number of classes; inferred from the labels when omitted.
        positive_class: Class recorded in the report header as the ROC positive class.

    Raises:
        ShapeError: If the inputs differ in length.
        DatasetError: If some class never occurs in `true_labels`.
    """
    pred = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    true = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    if pred.shape != true.shape:
        raise ShapeError(f"{pred.shape[0]} predictions for {true.shape[0]} true labels")
    if ids is not None and len(ids) != true.shape[0]:
        raise ShapeError(f"{len(ids)} ids for {true.shape[0]} samples")
    if true.size == 0:
        raise DatasetError("cannot evaluate an empty prediction set")
    if n_classes is None:
        n_classes = int(max(pred.max(), true.max())) + 1
    if min(pred.min(), true.min()) < 0 or max(pred.max(), true.max()) >= n_classes:
        raise ParameterError(f"labels must lie in [0, {n_classes})")

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    support = confusion.sum(axis=1)
    missing = np.flatnonzero(support == 0)
    if missing.size:
        raise DatasetError(f"class {int(missing[0])} has no samples in the true labels")

    per_class = np.diag(confusion) / support
    wrong = np.flatnonzero(pred != true)
    labels_of = (lambda i: str(ids[i])) if ids is not None else str
    return EvalReport(
        per_class_accuracy=per_class,
        mean_classwise_accuracy=float(np.mean(per_class)),
        confusion=confusion,
        misclassified_ids=tuple(labels_of(int(i)) for i in wrong),
        class_names=tuple(class_names),
        positive_class=positive_class,
    )


def _binary_inputs(scores, true_labels, positive_class: int) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(true_labels).reshape(-1)
    if s.shape != y.shape:
        raise ShapeError(f"{s.shape[0]} scores for {y.shape[0]} labels")
    if not np.all(np.isfinite(s)):
        raise ParameterError("scores must be finite")
    pos = y == positive_class
    if pos.all() or not pos.any():
        raise DatasetError("ROC analysis needs at least one positive and one negative sample")
    return s, pos


def roc(scores: Sequence[float], true_labels: Sequence[int], positive_class: int = POSITIVE_CLASS) -> RocCurve:
    """
    Threshold sweep over the distinct scores, highest first, with trapezoidal AUC.

    The curve starts at (0, 0) (threshold +inf) and ends at (1, 1).

    Raises:
        DatasetError: If only one class is present.
    """
    s, pos = _binary_inputs(scores, true_labels, positive_class)
    order = np.argsort(-s, kind="mergesort")
    s_sorted, pos_sorted = s[order], pos[order]

    # last index of every run of equal scores
    ends = np.append(np.flatnonzero(np.diff(s_sorted)), s_sorted.shape[0] - 1)
    tps = np.cumsum(pos_sorted)[ends]
    fps = (ends + 1) - tps

    n_pos, n_neg = pos.sum(), (~pos).sum()
    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])
    thresholds = np.concatenate([[np.inf], s_sorted[ends]])
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc, positive_class=positive_class)


def pair_count_auc(scores: Sequence[float], true_labels: Sequence[int], positive_class: int = POSITIVE_CLASS) -> float:
    """Fraction of (positive, negative) pairs ranked correctly, ties counting one half."""
    s, pos = _binary_inputs(scores, true_labels, positive_class)
    sp, sn = s[pos][:, None], s[~pos][None, :]
    wins = (sp > sn).sum() + 0.5 * (sp == sn).sum()
    return float(wins / (sp.shape[0] * sn.shape[1]))


# ---------------- WRITERS ---------------- #

def write_report(report: EvalReport, path: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(report.to_text())
    logger.info("Wrote evaluation report to %s", path)


def write_confusion_csv(report: EvalReport, path: str):
    report.confusion_frame().to_csv(path)


def write_roc_csv(curve: RocCurve, path: str):
    """`fpr,tpr` rows between a positive-class header comment and an `auc` footer comment."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# positive_class={curve.positive_class}\n")
        curve.to_frame().to_csv(f, index=False, float_format="%.17g")
        f.write(f"# auc={curve.auc!r}\n")
    logger.info("Wrote ROC curve (AUC %.4f) to %s", curve.auc, path)


def read_roc_csv(path: str) -> RocCurve:
    frame = pd.read_csv(path, comment="#")
    with open(path, "r", encoding="utf-8") as f:
        comments = [line[1:].strip() for line in f if line.startswith("#")]
    meta = dict(c.split("=", 1) for c in comments if "=" in c)
    return RocCurve(
        fpr=frame["fpr"].to_numpy(dtype=np.float64),
        tpr=frame["tpr"].to_numpy(dtype=np.float64),
        thresholds=np.full(len(frame), np.nan),
        auc=float(meta.get("auc", "nan")),
        positive_class=int(meta.get("positive_class", POSITIVE_CLASS)),
    )
