"""
Model Container Persistence Layer (CRAE).

One file holds everything evaluate/reconstruct need: the autoencoder stack, the class
means of every layer, the downstream classifier, and the image geometry.

Layout, little-endian throughout:

    "CRAE" | u32 version (1) | u32 layer_count
    per layer:
        u8 activation tag (0 sigmoid, 1 tanh, 2 linear) | u32 input_dim | u32 hidden_dim
        f64[hidden * input] W_e | f64[input * hidden] W_d           (row-major)
        u32 n_classes (0 = no means stored) | f64[n_classes * hidden] means
    tagged sections, 4 ASCII bytes each:
        "MLP " | u32 n_layers | per layer: u32 in | u32 out | u8 act (0 sigmoid, 3 softmax)
               | f64[in * out] W | f64[out] b
        "META" | u32 image height | u32 image width | u32 n_names | (u16 length + UTF-8) * n_names
        "END "

Encoding is a pure function of the bundle, so identical models give identical bytes
and load -> save reproduces a file byte for byte.
"""

import io
import logging
import struct
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.components.autogen import AutoencoderLayer, ClassMeans
from app.components.classifier import DenseLayer, MlpModel
from app.components.numkit import ActivationFactory
from app.errors import ModelFormatError

logger = logging.getLogger(__name__)

MAGIC = b"CRAE"
VERSION = 1
TAG_MLP = b"MLP "
TAG_META = b"META"
TAG_END = b"END "
DENSE_TAGS = {"sigmoid": 0, "softmax": 3}


@dataclass(eq=False)
class ModelBundle:
    """
    Everything a trained pipeline consists of.

    Attributes:
        layers (list): Autoencoder layers, input side first.
        means (list): ClassMeans per layer (None where not stored).
        classifier (MlpModel, optional): Downstream network on top-layer features.
        image_shape (tuple, optional): (height, width) of the input images.
        class_names (tuple): Display names per class index.
    """

    layers: List[AutoencoderLayer] = field(default_factory=list)
    means: List[Optional[ClassMeans]] = field(default_factory=list)
    classifier: Optional[MlpModel] = None
    image_shape: Optional[Tuple[int, int]] = None
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.means:
            self.means = [None] * len(self.layers)
        if len(self.means) != len(self.layers):
            raise ModelFormatError(f"{len(self.means)} mean sets for {len(self.layers)} layers")

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def feature_dim(self) -> int:
        return self.layers[-1].hidden_dim

    @property
    def top_means(self) -> Optional[ClassMeans]:
        return self.means[-1] if self.means else None


# ---------------- WRITE ---------------- #

def _put_u32(out: io.BytesIO, *values: int):
    out.write(struct.pack(f"<{len(values)}I", *values))


def _put_f64(out: io.BytesIO, array: np.ndarray):
    out.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def _put_names(out: io.BytesIO, names):
    _put_u32(out, len(names))
    for name in names:
        encoded = name.encode("utf-8")
        out.write(struct.pack("<H", len(encoded)))
        out.write(encoded)


def model_to_bytes(bundle: ModelBundle) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    _put_u32(out, VERSION, len(bundle.layers))

    for layer, means in zip(bundle.layers, bundle.means):
        out.write(struct.pack("<B", layer.activation.tag))
        _put_u32(out, layer.input_dim, layer.hidden_dim)
        _put_f64(out, layer.encoder_weights)
        _put_f64(out, layer.decoder_weights)
        if means is None:
            _put_u32(out, 0)
        else:
            _put_u32(out, means.n)
            _put_f64(out, means.means)

    if bundle.classifier is not None:
        out.write(TAG_MLP)
        _put_u32(out, len(bundle.classifier.layers))
        for dense in bundle.classifier.layers:
            _put_u32(out, dense.fan_in, dense.units)
            out.write(struct.pack("<B", DENSE_TAGS[dense.activation]))
            _put_f64(out, dense.weights)
            _put_f64(out, dense.bias)

    out.write(TAG_META)
    height, width = bundle.image_shape if bundle.image_shape else (0, 0)
    _put_u32(out, height, width)
    _put_names(out, bundle.class_names)
    out.write(TAG_END)
    return out.getvalue()


# ---------------- READ ---------------- #

class _Reader:
    def __init__(self, raw: bytes, source: str):
        self.raw = raw
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise ModelFormatError(f"{self.source}: unexpected end of model file at byte {self.pos}")
        chunk = self.raw[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self, rows: int, cols: int) -> np.ndarray:
        data = self.take(8 * rows * cols)
        return np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(rows, cols)


def model_from_bytes(raw: bytes, source: str = "<bytes>") -> ModelBundle:
    """
    Raises:
        ModelFormatError: On a bad magic number, unsupported version, unknown tags or
            truncated data.
    """
    r = _Reader(raw, source)
    magic = r.take(4)
    if magic != MAGIC:
        raise ModelFormatError(f"{source}: not a CRAE model container (magic {magic!r})")
    version = r.u32()
    if version != VERSION:
        raise ModelFormatError(f"{source}: unsupported model format version {version}")

    layers, means = [], []
    for _ in range(r.u32()):
        tag = r.u8()
        try:
            activation = ActivationFactory.get_activation(tag)
        except ValueError:
            raise ModelFormatError(f"{source}: unknown activation tag {tag}")
        input_dim, hidden_dim = r.u32(), r.u32()
        w_e = r.f64(hidden_dim, input_dim)
        w_d = r.f64(input_dim, hidden_dim)
        layers.append(AutoencoderLayer(w_e, w_d, activation))
        n_classes = r.u32()
        means.append(ClassMeans(r.f64(n_classes, hidden_dim)) if n_classes else None)

    bundle = ModelBundle(layers=layers, means=means)
    dense_names = {v: k for k, v in DENSE_TAGS.items()}
    while True:
        section = r.take(4)
        if section == TAG_END:
            break
        if section == TAG_MLP:
            dense = []
            for _ in range(r.u32()):
                fan_in, units = r.u32(), r.u32()
                act = r.u8()
                if act not in dense_names:
                    raise ModelFormatError(f"{source}: unknown classifier activation tag {act}")
                dense.append(DenseLayer(r.f64(fan_in, units), r.f64(1, units).reshape(-1), dense_names[act]))
            n_out = dense[-1].units if dense else 1
            bundle.classifier = MlpModel(dense, n_classes=2 if n_out == 1 else n_out)
        elif section == TAG_META:
            height, width = r.u32(), r.u32()
            bundle.image_shape = (height, width) if height and width else None
            bundle.class_names = tuple(r.take(r.u16()).decode("utf-8") for _ in range(r.u32()))
        else:
            raise ModelFormatError(f"{source}: unknown section {section!r}")

    if r.pos != len(raw):
        raise ModelFormatError(f"{source}: {len(raw) - r.pos} trailing bytes after END section")
    return bundle


def save_model(bundle: ModelBundle, path: str):
    with open(path, "wb") as f:
        f.write(model_to_bytes(bundle))
    logger.info("Saved model (%d layer(s)%s) to %s", len(bundle.layers),
                ", classifier" if bundle.classifier else "", path)


def load_model(path: str) -> ModelBundle:
    with open(path, "rb") as f:
        raw = f.read()
    return model_from_bytes(raw, source=path)
