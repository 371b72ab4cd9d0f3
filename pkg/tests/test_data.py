import struct

import numpy as np
import pytest
from PIL import Image

from app.components.data import (
    LabeledDataset,
    SynthSpec,
    balance_classes,
    class_templates,
    concat,
    empty_like,
    generate_synthetic,
    load_dataset,
    load_image_dir,
    read_image,
    resize_bilinear,
    resize_image,
    save_dataset,
    split,
    write_pgm,
)
from app.components.data.cache import dataset_from_bytes, dataset_to_bytes
from app.components.data.images import parse_netpbm, read_manifest
from app.errors import DatasetError, ParameterError, ShapeError


# ---------------- CONTAINER ---------------- #

def test_dataset_validation():
    with pytest.raises(ShapeError):
        LabeledDataset(np.zeros((3, 2)), [0, 1], n_classes=2)
    with pytest.raises(DatasetError):
        LabeledDataset(np.zeros((2, 2)), [0, 2], n_classes=2)
    with pytest.raises(ShapeError):
        LabeledDataset(np.zeros((2, 4)), [0, 1], n_classes=2, image_shape=(3, 3))
    with pytest.raises(DatasetError):
        LabeledDataset(np.full((1, 2), 1.5), [0], n_classes=1).validate()
    with pytest.raises(DatasetError):
        LabeledDataset(np.array([[np.nan]]), [0], n_classes=1).validate(unit_range=False)


def test_subset_carries_ids(tiny_data):
    part = tiny_data.subset([7, 0])
    assert part.labels.tolist() == [1, 0]
    assert part.sample_ids == ("s07", "s00")
    assert np.array_equal(part.samples[0], tiny_data.samples[7])


# ---------------- IMAGES ---------------- #

def test_white_pgm_reads_as_one(tmp_path):
    path = tmp_path / "white.pgm"
    write_pgm(str(path), np.ones((3, 2)))
    image = read_image(str(path))
    assert image.shape == (3, 2)
    assert np.all(image == 1.0)


def test_pgm_values_scale_by_maxval(tmp_path):
    values = np.arange(16, dtype=np.uint8).reshape(4, 4) * 17
    raw = b"P5\n4 4\n255\n" + values.tobytes()
    assert np.array_equal(parse_netpbm(raw), values / 255.0)

    plain = b"P2\n# comment\n2 1\n10\n0 10\n"
    assert parse_netpbm(plain).tolist() == [[0.0, 1.0]]
    with pytest.raises(DatasetError):
        parse_netpbm(b"P5\n4 4\n255\n" + b"\x00" * 3)


def test_colour_images_reduce_to_luminance(tmp_path):
    raw = b"P6\n1 1\n255\n" + bytes([255, 0, 0])
    assert parse_netpbm(raw).shape == (1, 1, 3)
    path = tmp_path / "red.ppm"
    path.write_bytes(raw)
    assert read_image(str(path))[0, 0] == pytest.approx(0.299)


def test_png_goes_through_pillow(tmp_path):
    path = tmp_path / "grey.png"
    Image.fromarray(np.full((2, 3), 51, dtype=np.uint8)).save(path)
    assert np.allclose(read_image(str(path)), 0.2)


def test_resize_same_size_is_identity():
    image = np.arange(9, dtype=np.float64).reshape(3, 3) / 8.0
    assert np.array_equal(resize_image(image, 3), image)


def test_resize_ramp_down_by_two():
    ramp = np.arange(16, dtype=np.float64).reshape(4, 4) / 15.0
    out = resize_image(ramp, 2)
    assert np.allclose(out, np.array([[2.5, 4.5], [10.5, 12.5]]) / 15.0, rtol=0, atol=1e-15)


def test_resize_constant_image_stays_constant():
    assert np.allclose(resize_image(np.full((5, 7), 0.3), 4), 0.3)


def test_resize_upsample_interpolates_between_neighbours():
    out = resize_image(np.array([[0.0, 1.0], [0.0, 1.0]]), 4)
    assert out[0].tolist() == pytest.approx([0.0, 0.25, 0.75, 1.0])


def test_resize_dataset(small_synth):
    smaller = resize_bilinear(small_synth, 4)
    assert smaller.image_shape == (4, 4)
    assert smaller.samples.shape == (60, 16)
    assert smaller.labels.tolist() == small_synth.labels.tolist()
    with pytest.raises(ParameterError):
        resize_bilinear(small_synth.with_samples(small_synth.samples), 4)
    with pytest.raises(ParameterError):
        resize_image(np.ones((2, 2)), 0)


def _write_manifest_tree(tmp_path):
    write_pgm(str(tmp_path / "a.pgm"), np.full((4, 4), 0.2))
    write_pgm(str(tmp_path / "b.pgm"), np.full((4, 4), 0.8))
    write_pgm(str(tmp_path / "c.pgm"), np.full((4, 4), 0.6))
    manifest = tmp_path / "labels.csv"
    manifest.write_text("path,label,subject\n# female first on purpose\nb.pgm,female,p1\na.pgm,male,p2\n"
                        "\nc.pgm,female,p3\n", encoding="utf-8")
    return manifest


def test_load_image_dir_from_manifest(tmp_path):
    manifest = _write_manifest_tree(tmp_path)
    data = load_image_dir(str(tmp_path), str(manifest))
    assert data.rows == 3 and data.dim == 16
    assert data.class_names == ("female", "male")
    assert data.labels.tolist() == [0, 1, 0]
    assert data.sample_ids == ("b.pgm", "a.pgm", "c.pgm")
    assert data.subject_ids == ("p1", "p2", "p3")
    assert data.image_shape == (4, 4)
    assert data.samples[1, 0] == pytest.approx(51 / 255.0)


def test_manifest_errors_carry_line_numbers(tmp_path):
    manifest = _write_manifest_tree(tmp_path)
    manifest.write_text("a.pgm,male\nmissing.pgm,female\n", encoding="utf-8")
    with pytest.raises(DatasetError, match=":2: image not found"):
        load_image_dir(str(tmp_path), str(manifest))

    manifest.write_text("a.pgm\n", encoding="utf-8")
    with pytest.raises(DatasetError, match=":1:"):
        read_manifest(str(manifest))


def test_truncated_png_reports_its_manifest_line(tmp_path):
    write_pgm(str(tmp_path / "ok.pgm"), np.full((16, 16), 0.5))
    noise = np.random.Generator(np.random.PCG64(2)).integers(0, 256, (16, 16), dtype=np.uint8)
    Image.fromarray(noise).save(tmp_path / "full.png")
    raw = (tmp_path / "full.png").read_bytes()
    (tmp_path / "cut.png").write_bytes(raw[:len(raw) // 2])
    manifest = tmp_path / "m.csv"
    manifest.write_text("ok.pgm,male\ncut.png,female\n", encoding="utf-8")
    with pytest.raises(DatasetError, match=":2: cannot decode image"):
        load_image_dir(str(tmp_path), str(manifest))


def test_mixed_sizes_need_a_target_side(tmp_path):
    write_pgm(str(tmp_path / "big.pgm"), np.full((6, 6), 0.5))
    write_pgm(str(tmp_path / "small.pgm"), np.full((4, 4), 0.5))
    manifest = tmp_path / "m.csv"
    manifest.write_text("big.pgm,male\nsmall.pgm,female\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="expected 6x6"):
        load_image_dir(str(tmp_path), str(manifest))
    data = load_image_dir(str(tmp_path), str(manifest), target_side=4)
    assert data.image_shape == (4, 4)
    assert np.allclose(data.samples, 128 / 255.0)


# ---------------- SYNTHETIC ---------------- #

def test_synthetic_defaults(default_synth):
    assert default_synth.samples.shape == (400, 256)
    assert default_synth.class_counts().tolist() == [200, 200]
    assert default_synth.samples.min() >= 0.0 and default_synth.samples.max() <= 1.0
    assert default_synth.class_names == ("male", "female")
    again = generate_synthetic(SynthSpec())
    assert np.array_equal(again.samples, default_synth.samples)


def test_synthetic_classes_are_separable_by_nearest_template(default_synth):
    templates = class_templates(SynthSpec())
    d = ((default_synth.samples[:, None, :] - templates[None, :, :]) ** 2).sum(axis=2)
    assert np.mean(np.argmin(d, axis=1) == default_synth.labels) >= 0.95


def test_nir_spectrum_compresses_the_class_difference():
    visible = class_templates(SynthSpec())
    nir = class_templates(SynthSpec(spectrum="nir"))
    assert np.allclose(nir[1] - nir[0], 0.5 * (visible[1] - visible[0]))


def test_shifted_domain_has_orthogonal_class_difference():
    source = class_templates(SynthSpec())
    target = class_templates(SynthSpec(template_shift=0.25))
    a, b = source[1] - source[0], target[1] - target[0]
    assert abs(a @ b) < 1e-9 * (np.linalg.norm(a) * np.linalg.norm(b))


def test_synthetic_rejects_bad_specs():
    with pytest.raises(ParameterError):
        generate_synthetic(SynthSpec(resolution=2))
    with pytest.raises(ParameterError):
        generate_synthetic(SynthSpec(spectrum="uv"))


# ---------------- SET OPERATIONS ---------------- #

def test_concat_visible_and_nir():
    visible = generate_synthetic(SynthSpec(resolution=8, per_class=10))
    nir = generate_synthetic(SynthSpec(resolution=8, per_class=5, spectrum="nir"))
    both = concat(visible, nir)
    assert both.rows == 30
    assert both.class_counts().tolist() == [15, 15]
    assert both.image_shape == (8, 8)


def test_concat_remaps_labels_by_name():
    a = LabeledDataset(np.zeros((2, 3)), [0, 1], n_classes=2, class_names=("male", "female"))
    b = LabeledDataset(np.ones((2, 3)), [0, 1], n_classes=2, class_names=("female", "male"))
    joined = concat(a, b)
    assert joined.labels.tolist() == [0, 1, 1, 0]
    with pytest.raises(ShapeError):
        concat(a, LabeledDataset(np.zeros((1, 4)), [0], n_classes=2, class_names=("male", "female")))


def test_concat_with_an_empty_dataset(tiny_data):
    empty = empty_like(tiny_data)
    assert empty.rows == 0 and empty.dim == tiny_data.dim
    assert concat(tiny_data, empty) is tiny_data
    joined = concat(empty, tiny_data)
    assert np.array_equal(joined.samples, tiny_data.samples)
    assert joined.labels.tolist() == tiny_data.labels.tolist()
    assert joined.class_names == tiny_data.class_names
    assert joined.sample_ids == tiny_data.sample_ids


def test_concat_rejects_named_with_unnamed(tiny_data):
    unnamed = LabeledDataset(np.zeros((2, 8)), [0, 1], n_classes=2)
    with pytest.raises(DatasetError, match="unnamed"):
        concat(tiny_data, unnamed)
    with pytest.raises(DatasetError, match="unnamed"):
        concat(unnamed, tiny_data)


def test_split_is_subject_exclusive_and_deterministic(small_synth):
    train, test = split(small_synth, 0.5, seed=3, subject_ids=small_synth.subject_ids)
    assert not set(train.subject_ids) & set(test.subject_ids)
    assert train.rows + test.rows == small_synth.rows
    again, _ = split(small_synth, 0.5, seed=3, subject_ids=small_synth.subject_ids)
    assert again.sample_ids == train.sample_ids


def test_split_without_subjects(small_synth):
    train, test = split(small_synth, 0.25, seed=1)
    assert (train.rows, test.rows) == (15, 45)
    assert not set(train.sample_ids) & set(test.sample_ids)
    with pytest.raises(ParameterError):
        split(small_synth, 1.0, seed=1)


def test_split_reports_missing_class():
    data = LabeledDataset(np.zeros((3, 2)), [0, 0, 1], n_classes=2, class_names=("male", "female"))
    with pytest.raises(DatasetError, match="female"):
        split(data, 0.5, seed=0)


def test_balance_classes():
    data = LabeledDataset(np.arange(10.0).reshape(5, 2), [0, 0, 0, 1, 1], n_classes=2)
    balanced = balance_classes(data, seed=1)
    assert balanced.class_counts().tolist() == [2, 2]
    with pytest.raises(DatasetError):
        balance_classes(data, seed=1, per_class=3)


# ---------------- CRDS ---------------- #

def test_crds_round_trip(tmp_path, default_synth):
    path = tmp_path / "train.crds"
    save_dataset(default_synth, str(path))
    raw = path.read_bytes()
    assert raw[:4] == b"CRDS"
    assert struct.unpack_from("<IIII", raw, 4) == (1, 400, 256, 2)

    loaded = load_dataset(str(path))
    assert np.array_equal(loaded.samples, default_synth.samples)
    assert np.array_equal(loaded.labels, default_synth.labels)
    assert loaded.class_names == ("male", "female")
    assert loaded.image_shape == (16, 16)
    assert dataset_to_bytes(loaded) == raw


def test_crds_rejects_bad_input(tiny_data):
    raw = dataset_to_bytes(tiny_data)
    with pytest.raises(DatasetError, match="magic"):
        dataset_from_bytes(b"XXXX" + raw[4:])
    with pytest.raises(DatasetError, match="truncated"):
        dataset_from_bytes(raw[:40])
    # cut inside the last name, then inside its length field
    with pytest.raises(DatasetError, match="truncated at name 1"):
        dataset_from_bytes(raw[:-3])
    with pytest.raises(DatasetError, match="truncated at name 1"):
        dataset_from_bytes(raw[:-7])
    with pytest.raises(DatasetError, match="trailing"):
        dataset_from_bytes(raw + b"\x00")
