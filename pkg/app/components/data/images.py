"""
Image Ingestion.

Reads already-cropped face images into [0, 1] grayscale arrays, resizes them with a
documented bilinear kernel, and assembles a `LabeledDataset` from a directory plus a
label manifest.

Formats:
    * Netpbm P2/P5 (grayscale) and P3/P6 (colour) are parsed here directly.
    * Anything else (PNG, JPEG, ...) goes through Pillow.
Colour images are reduced to luminance with weights 0.299 / 0.587 / 0.114.

Resize convention: half-pixel centres. Output pixel i samples the source at
`(i + 0.5) * in / out - 0.5`, clamped to `[0, in - 1]`, and interpolates linearly
between the two neighbouring source pixels along each axis.

Manifest format (UTF-8, comma separated, no quoting):
    relative_path,label_name[,subject_id]
An optional header line is recognised by its second field being `label`. Blank lines
and lines starting with `#` are skipped.
"""

import logging
import os
from typing import List, Optional, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.errors import DatasetError, ParameterError

from .dataset import LabeledDataset

logger = logging.getLogger(__name__)

LUMINANCE = np.array([0.299, 0.587, 0.114])
NETPBM_MAGICS = {b"P2": (False, 1), b"P3": (False, 3), b"P5": (True, 1), b"P6": (True, 3)}


# ---------------- NETPBM ---------------- #

def _netpbm_tokens(raw: bytes, count: int, start: int) -> Tuple[List[bytes], int]:
    """Reads `count` whitespace-separated header tokens, skipping `#` comments."""
    tokens = []
    pos = start
    n = len(raw)
    while len(tokens) < count:
        while pos < n and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < n and raw[pos:pos + 1] == b"#":
            while pos < n and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise DatasetError("truncated Netpbm header")
        begin = pos
        while pos < n and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(raw[begin:pos])
    return tokens, pos


def parse_netpbm(raw: bytes) -> np.ndarray:
    """
    Decodes a P2/P3/P5/P6 image to a float64 array scaled by maxval.

    Returns:
        np.ndarray: (height, width) for grayscale, (height, width, 3) for colour.

    Raises:
        DatasetError: On an unknown magic number, bad header or short pixel data.
    """
    magic = raw[:2]
    if magic not in NETPBM_MAGICS:
        raise DatasetError(f"not a supported Netpbm image (magic {magic!r})")
    binary, channels = NETPBM_MAGICS[magic]

    try:
        tokens, pos = _netpbm_tokens(raw, 3, 2)
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise DatasetError("malformed Netpbm header")
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise DatasetError(f"invalid Netpbm geometry {width}x{height}, maxval {maxval}")

    count = width * height * channels
    if binary:
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = raw[pos:pos + count * dtype.itemsize]
        if len(body) < count * dtype.itemsize:
            raise DatasetError(f"Netpbm raster truncated: expected {count} samples")
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    else:
        parts = raw[pos:].split()
        if len(parts) < count:
            raise DatasetError(f"Netpbm raster truncated: expected {count} samples, got {len(parts)}")
        try:
            values = np.array([int(p) for p in parts[:count]], dtype=np.float64)
        except ValueError:
            raise DatasetError("non-numeric sample in plain Netpbm raster")

    if values.max(initial=0.0) > maxval:
        raise DatasetError(f"Netpbm sample exceeds maxval {maxval}")
    shape = (height, width) if channels == 1 else (height, width, 3)
    return values.reshape(shape) / maxval


def to_grayscale(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return image
    return image[..., :3] @ LUMINANCE


def read_image(path: str) -> np.ndarray:
    """
    Loads one image as a (height, width) grayscale array with values in [0, 1].

    Raises:
        DatasetError: If the file cannot be decoded.
        FileNotFoundError: If the file does not exist.
    """
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] in NETPBM_MAGICS:
        return np.clip(to_grayscale(parse_netpbm(raw)), 0.0, 1.0)

    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(img, dtype=np.float64) / 65535.0
            elif img.mode == "L":
                arr = np.asarray(img, dtype=np.float64) / 255.0
            else:
                arr = to_grayscale(np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0)
    except (UnidentifiedImageError, OSError) as e:
        # Pillow reports truncated rasters as a plain OSError
        raise DatasetError(f"cannot decode image {path}: {e}")
    return np.clip(arr, 0.0, 1.0)


def write_pgm(path: str, image: np.ndarray):
    """Writes a binary 8-bit PGM; values are clamped to [0, 1] and rounded to `v * 255`."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ParameterError(f"PGM export needs a 2-D image, got shape {image.shape}")
    pixels = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


# ---------------- RESIZE ---------------- #

def _axis_weights(n_in: int, n_out: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo
    return lo, hi, frac


def resize_image(image: np.ndarray, target_side: int) -> np.ndarray:
    """Bilinear resize of one (height, width) image to target_side x target_side."""
    if target_side < 1:
        raise ParameterError(f"target side must be at least 1, got {target_side}")
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    if h < 1 or w < 1:
        raise ParameterError(f"source image must be non-empty, got {h}x{w}")
    if h == target_side and w == target_side:
        return image.copy()

    r0, r1, fr = _axis_weights(h, target_side)
    c0, c1, fc = _axis_weights(w, target_side)
    top = image[r0][:, c0] * (1.0 - fc) + image[r0][:, c1] * fc
    bottom = image[r1][:, c0] * (1.0 - fc) + image[r1][:, c1] * fc
    return top * (1.0 - fr)[:, None] + bottom * fr[:, None]


def resize_bilinear(source: Union[np.ndarray, LabeledDataset], target_side: int):
    """
    Resizes a single image or every row of an image dataset.

    Args:
        source: A (height, width) array, or a `LabeledDataset` carrying `image_shape`.
        target_side (int): Output side length.

    Returns:
        Same kind as `source`.

    Raises:
        ParameterError: If `target_side < 1` or the dataset has no image shape.
    """
    if not isinstance(source, LabeledDataset):
        return resize_image(source, target_side)

    if source.image_shape is None:
        raise ParameterError("dataset has no image shape; cannot resize flattened features")
    if target_side < 1:
        raise ParameterError(f"target side must be at least 1, got {target_side}")
    h, w = source.image_shape
    rows = [resize_image(row.reshape(h, w), target_side).reshape(-1) for row in source.samples]
    samples = np.vstack(rows) if rows else np.zeros((0, target_side * target_side))
    return source.with_samples(samples, image_shape=(target_side, target_side))


# ---------------- MANIFEST ---------------- #

def read_manifest(manifest_path: str) -> List[Tuple[int, str, str, Optional[str]]]:
    """
    Parses the label manifest.

    Returns:
        list: (line_number, relative_path, label_name, subject_id or None) per entry.

    Raises:
        DatasetError: On malformed lines or an empty manifest; messages carry line numbers.
    """
    entries = []
    with open(manifest_path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    seen_content = False
    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = [part.strip() for part in text.split(",")]
        if not seen_content:
            seen_content = True
            if len(fields) >= 2 and fields[1].lower() == "label":
                continue
        if len(fields) not in (2, 3) or not fields[0] or not fields[1]:
            raise DatasetError(f"{manifest_path}:{number}: expected 'relative_path,label_name[,subject_id]'")
        subject = fields[2] if len(fields) == 3 and fields[2] else None
        entries.append((number, fields[0], fields[1], subject))

    if not entries:
        raise DatasetError(f"{manifest_path}: manifest has no entries")
    return entries


def load_image_dir(root_path: str, manifest_path: str, target_side: Optional[int] = None) -> LabeledDataset:
    """
    Builds a dataset from a directory of images and a label manifest.

    Label names map to class indices in order of first appearance; row order equals
    manifest order.

    Args:
        root_path (str): Directory the manifest paths are relative to.
        manifest_path (str): The manifest file.
        target_side (int, optional): Resize every image to this square side. Required
            when the images do not all share one size.

    Raises:
        DatasetError: Missing or undecodable files (with manifest line numbers),
            inconsistent image sizes without `target_side`.
    """
    entries = read_manifest(manifest_path)
    names: List[str] = []
    rows, labels, ids, subjects = [], [], [], []
    shape = None

    for number, rel_path, label_name, subject in entries:
        path = os.path.join(root_path, rel_path)
        try:
            image = read_image(path)
        except FileNotFoundError:
            raise DatasetError(f"{manifest_path}:{number}: image not found: {path}")
        except DatasetError as e:
            raise DatasetError(f"{manifest_path}:{number}: {e}")

        if target_side is not None:
            image = resize_image(image, target_side)
        if shape is None:
            shape = image.shape
        elif image.shape != shape:
            raise DatasetError(f"{manifest_path}:{number}: image {path} is {image.shape[0]}x{image.shape[1]}, "
                               f"expected {shape[0]}x{shape[1]} (pass a target side to resize)")

        if label_name not in names:
            names.append(label_name)
        rows.append(image.reshape(-1))
        labels.append(names.index(label_name))
        ids.append(rel_path)
        subjects.append(subject)

    has_subjects = all(s is not None for s in subjects)
    logger.info("Loaded %d images (%dx%d) in %d classes from %s", len(rows), shape[0], shape[1],
                len(names), manifest_path)
    return LabeledDataset(
        samples=np.vstack(rows),
        labels=np.array(labels),
        n_classes=len(names),
        class_names=tuple(names),
        sample_ids=tuple(ids),
        subject_ids=tuple(subjects) if has_subjects else (),
        image_shape=shape,
    ).validate()
