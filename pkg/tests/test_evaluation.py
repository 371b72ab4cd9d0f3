import numpy as np
import pytest

from app.components.autogen import AutoencoderLayer, ClassMeans
from app.components.data import LabeledDataset, read_image
from app.components.evaluation import (
    distance_report,
    evaluate,
    export_class_mean_images,
    export_reconstructions,
    format_percentage,
    pair_count_auc,
    read_roc_csv,
    roc,
    to_pixel_bytes,
    write_confusion_csv,
    write_report,
    write_roc_csv,
)
from app.components.numkit import Linear, make_rng
from app.errors import DatasetError, ShapeError


def _predictions(correct_per_class, total_per_class):
    true, pred = [], []
    for c, (correct, total) in enumerate(zip(correct_per_class, total_per_class)):
        true += [c] * total
        pred += [c] * correct + [1 - c] * (total - correct)
    return pred, true


@pytest.mark.parametrize("correct, expected", [((8747, 9273), "90.10"), ((6647, 7617), "71.32")])
def test_mean_classwise_accuracy_formatting(correct, expected):
    pred, true = _predictions(correct, (10000, 10000))
    report = evaluate(pred, true)
    assert format_percentage(report.mean_classwise_accuracy) == expected
    assert report.confusion.tolist() == [[correct[0], 10000 - correct[0]], [10000 - correct[1], correct[1]]]


def test_all_correct():
    report = evaluate([0, 1, 1, 0], [0, 1, 1, 0])
    assert report.mean_classwise_accuracy == 1.0
    assert report.misclassified_ids == ()


def test_mean_classwise_is_unweighted():
    # 9 of 10 class-0 samples right, 0 of 2 class-1 samples right
    pred, true = _predictions((9, 0), (10, 2))
    report = evaluate(pred, true)
    assert report.mean_classwise_accuracy == pytest.approx(0.45)
    assert report.overall_accuracy == pytest.approx(0.75)


def test_mean_classwise_unchanged_when_a_class_is_duplicated():
    pred, true = _predictions((7, 3), (10, 5))
    base = evaluate(pred, true)
    extra = [i for i, t in enumerate(true) if t == 1]
    doubled = evaluate(pred + [pred[i] for i in extra], true + [true[i] for i in extra])
    assert doubled.confusion[1].tolist() == [4, 6]
    assert doubled.mean_classwise_accuracy == pytest.approx(base.mean_classwise_accuracy, rel=1e-15)
    assert doubled.overall_accuracy != pytest.approx(base.overall_accuracy)


def test_misclassified_ids_in_input_order():
    report = evaluate([1, 0, 0, 1], [0, 0, 1, 1], ids=["a", "b", "c", "d"])
    assert report.misclassified_ids == ("a", "c")
    assert evaluate([1, 0], [0, 1]).misclassified_ids == ("0", "1")


def test_evaluate_errors():
    with pytest.raises(ShapeError):
        evaluate([0, 1], [0])
    with pytest.raises(DatasetError):
        evaluate([0, 0], [0, 0], n_classes=2)


def test_report_files(tmp_path):
    report = evaluate([0, 1, 1], [0, 1, 0], ids=["x", "y", "z"], class_names=("male", "female"))
    write_report(report, str(tmp_path / "report.txt"))
    text = (tmp_path / "report.txt").read_text(encoding="utf-8")
    assert "mean_classwise_accuracy = 75.00" in text
    assert "class_0_name = male" in text
    assert "misclassified_id = z" in text

    write_confusion_csv(report, str(tmp_path / "confusion.csv"))
    lines = (tmp_path / "confusion.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "true\\predicted,male,female"
    assert lines[1] == "male,1,1"


def test_roc_worked_example():
    curve = roc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0])
    assert curve.auc == pytest.approx(0.75)
    assert curve.points[0] == (0.0, 0.0)
    assert curve.points[-1] == (1.0, 1.0)


def test_roc_perfect_and_identical_scores():
    assert roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).auc == 1.0
    flat = roc([0.5] * 6, [0, 1, 0, 1, 1, 0])
    assert flat.auc == 0.5
    assert flat.points == [(0.0, 0.0), (1.0, 1.0)]


def test_roc_needs_both_classes():
    with pytest.raises(DatasetError):
        roc([0.1, 0.2], [1, 1])


def test_roc_positive_class_choice():
    scores, labels = [0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0]
    assert roc(scores, labels, positive_class=0).auc == pytest.approx(0.25)


@pytest.mark.parametrize("seed", range(50))
def test_sweep_auc_equals_pair_counting(seed):
    rng = make_rng(seed)
    n = int(rng.integers(4, 30))
    labels = np.concatenate([[0, 1], rng.integers(0, 2, n - 2)])
    scores = np.round(rng.random(n), 1)
    curve = roc(scores, labels)
    assert abs(curve.auc - pair_count_auc(scores, labels)) <= 1e-9
    assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    doubled = roc(np.concatenate([scores, scores]), np.concatenate([labels, labels]))
    assert doubled.auc == pytest.approx(curve.auc, abs=1e-12)


def test_roc_csv_round_trip(tmp_path):
    curve = roc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0])
    path = tmp_path / "roc.csv"
    write_roc_csv(curve, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# positive_class=1"
    assert lines[1] == "fpr,tpr"
    assert lines[-1] == "# auc=0.75"
    back = read_roc_csv(str(path))
    assert back.points == curve.points
    assert back.auc == curve.auc


def test_distance_report_with_identity_features():
    data = LabeledDataset(np.array([[0.0, 0.0], [0.0, 2.0], [4.0, 1.0]]), [0, 0, 1], n_classes=2)
    layer = AutoencoderLayer(np.eye(2), np.eye(2), Linear())
    report = distance_report(layer, data)
    # class 0 mean (0, 1), class 1 mean (4, 1)
    assert report.matrix[0, 0] == pytest.approx(1.0)
    assert report.matrix[0, 1] == pytest.approx(np.sqrt(17.0))
    assert report.matrix[1, 1] == pytest.approx(0.0)
    assert report.matrix[1, 0] == pytest.approx(4.0)
    assert report.separation_ratio() == pytest.approx(0.5 / ((np.sqrt(17.0) + 4.0) / 2))
    assert list(report.to_frame(("male", "female")).columns) == ["to_mean_male", "to_mean_female", "intra", "inter"]


def test_distance_report_is_symmetric_under_label_swap():
    # class 1 is the mirror image of class 0 about x = 2
    samples = np.array([[0.0, 0.0], [0.0, 2.0], [1.0, 1.0], [4.0, 0.0], [4.0, 2.0], [3.0, 1.0]])
    labels = np.array([0, 0, 0, 1, 1, 1])
    layer = AutoencoderLayer(np.eye(2), np.eye(2), Linear())
    report = distance_report(layer, LabeledDataset(samples, labels, n_classes=2))
    swapped = distance_report(layer, LabeledDataset(samples, 1 - labels, n_classes=2))
    assert np.allclose(swapped.matrix, report.matrix[::-1, ::-1], rtol=0, atol=1e-12)
    assert report.matrix[0, 0] == pytest.approx(report.matrix[1, 1])
    assert report.matrix[0, 1] == pytest.approx(report.matrix[1, 0])
    assert swapped.separation_ratio() == pytest.approx(report.separation_ratio())


def test_pixel_bytes():
    assert to_pixel_bytes(np.array([0.0, 0.5, 1.0, 1.2, -0.1])).tolist() == [0, 128, 255, 255, 0]


def test_export_reconstructions(tmp_path):
    layer = AutoencoderLayer(np.eye(4), np.eye(4), Linear())
    samples = np.array([[0.0, 0.2, 0.4, 1.0], [1.0, 1.0, 0.0, 0.5]])
    means = ClassMeans(np.array([[0.1, 0.1, 0.1, 0.1], [0.9, 0.9, 0.9, 0.9]]))
    written = export_reconstructions([layer], samples, (2, 2), str(tmp_path / "out"), means)
    names = sorted(p.split("/")[-1] for p in written)
    assert names == ["input_0000.pgm", "input_0001.pgm", "mean_class_0.pgm", "mean_class_1.pgm",
                     "recon_0000.pgm", "recon_0001.pgm"]
    recon = read_image(str(tmp_path / "out" / "recon_0000.pgm"))
    assert np.array_equal(recon, np.rint(samples[0].reshape(2, 2) * 255) / 255.0)
    with pytest.raises(ShapeError):
        export_reconstructions([layer], samples, (3, 3), str(tmp_path / "bad"))


def test_export_class_mean_images(tmp_path, small_synth):
    written = export_class_mean_images(small_synth, str(tmp_path))
    assert [p.split("/")[-1] for p in written] == ["pixel_mean_0.pgm", "pixel_mean_1.pgm"]
    assert read_image(written[0]).shape == (8, 8)
