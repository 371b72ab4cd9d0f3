"""
Binary Dataset Cache (CRDS).

Layout, little-endian:

    "CRDS" | u32 version (1) | u32 rows | u32 cols | u32 n_classes
    | u16 label * rows | f64 sample * (rows * cols), row-major
    extension block:
    | u32 image height | u32 image width   (0, 0 when the rows are not images)
    | u32 class-name count | (u16 byte length + UTF-8 bytes) * count

Sample and subject ids are not stored.
"""

import logging
import struct

import numpy as np

from app.errors import DatasetError

from .dataset import LabeledDataset

logger = logging.getLogger(__name__)

MAGIC = b"CRDS"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def dataset_to_bytes(data: LabeledDataset) -> bytes:
    if data.n_classes > 65536:
        raise DatasetError(f"CRDS stores labels as u16; {data.n_classes} classes do not fit")
    out = bytearray()
    out += _HEADER.pack(MAGIC, VERSION, data.rows, data.dim, data.n_classes)
    out += data.labels.astype("<u2").tobytes()
    out += data.samples.astype("<f8").tobytes()

    height, width = data.image_shape if data.image_shape else (0, 0)
    out += struct.pack("<III", height, width, len(data.class_names))
    for name in data.class_names:
        encoded = name.encode("utf-8")
        out += struct.pack("<H", len(encoded)) + encoded
    return bytes(out)


def dataset_from_bytes(raw: bytes, source: str = "<bytes>") -> LabeledDataset:
    """
    Raises:
        DatasetError: On a bad magic number, an unsupported version, a truncated body
            or trailing bytes.
    """
    if len(raw) < _HEADER.size:
        raise DatasetError(f"{source}: file too short for a CRDS header")
    magic, version, rows, cols, n_classes = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise DatasetError(f"{source}: not a CRDS dataset (magic {magic!r})")
    if version != VERSION:
        raise DatasetError(f"{source}: unsupported CRDS version {version}")

    pos = _HEADER.size
    label_bytes, sample_bytes = 2 * rows, 8 * rows * cols
    if len(raw) < pos + label_bytes + sample_bytes + 12:
        raise DatasetError(f"{source}: CRDS body truncated")
    labels = np.frombuffer(raw, dtype="<u2", count=rows, offset=pos).astype(np.int64)
    pos += label_bytes
    samples = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=pos).astype(np.float64).reshape(rows, cols)
    pos += sample_bytes

    height, width, n_names = struct.unpack_from("<III", raw, pos)
    pos += 12
    names = []
    for i in range(n_names):
        if pos + 2 > len(raw):
            raise DatasetError(f"{source}: CRDS class-name table truncated at name {i}")
        (length,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        if pos + length > len(raw):
            raise DatasetError(f"{source}: CRDS class-name table truncated at name {i}")
        try:
            names.append(raw[pos:pos + length].decode("utf-8"))
        except UnicodeDecodeError as e:
            raise DatasetError(f"{source}: class name {i} is not valid UTF-8") from e
        pos += length
    if pos != len(raw):
        raise DatasetError(f"{source}: {len(raw) - pos} unexpected trailing bytes after the CRDS body")

    return LabeledDataset(
        samples=samples,
        labels=labels,
        n_classes=n_classes,
        class_names=tuple(names),
        image_shape=(height, width) if height and width else None,
    )


def save_dataset(data: LabeledDataset, path: str):
    with open(path, "wb") as f:
        f.write(dataset_to_bytes(data))
    logger.info("Wrote %d x %d dataset to %s", data.rows, data.dim, path)


def load_dataset(path: str) -> LabeledDataset:
    with open(path, "rb") as f:
        raw = f.read()
    return dataset_from_bytes(raw, source=path)
