"""Data sources: Gaussian toy domains, IDX files, synthetic digit images,
selection bias and additive noise corruption.

Randomness comes from numpy's PCG64 driven by a ``SeedSequence``. A stream
is named by ``(seed, *keys)``; distinct key tuples give independent streams,
so an experiment can hand trial ``i`` of source ``k`` the stream
``make_rng(seed, k, i)`` without the streams overlapping.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .core import LabeledDataset, UnlabeledDataset, as_features

__all__ = [
    "make_rng",
    "GaussianDomainSpec",
    "gen_gaussian_domain",
    "IdxParseError",
    "IdxTensor",
    "read_idx",
    "write_idx",
    "load_mnist",
    "even_odd_labels",
    "selection_bias_filter",
    "corrupt_gaussian_noise",
    "scale_pixels",
    "DigitStyle",
    "synthetic_digits",
    "TOY_MEANS",
]


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GaussianDomainSpec:
    mean_pos: tuple
    mean_neg: tuple
    n_per_class: int
    seed: int = 0

    def __post_init__(self):
        mp = np.asarray(self.mean_pos, dtype=float)
        mn = np.asarray(self.mean_neg, dtype=float)
        if mp.shape != mn.shape or mp.ndim != 1:
            raise ValueError("class means must be vectors of equal length")
        if not (np.all(np.isfinite(mp)) and np.all(np.isfinite(mn))):
            raise ValueError("class means must be finite")
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")


# (positive-class mean, negative-class mean) of the three toy domains
TOY_MEANS = {
    "S1": ((5.0, -5.0), (-5.0, -5.0)),
    "S2": ((2.0, -3.0), (0.0, 3.0)),
    "T": ((5.0, -3.0), (-5.0, -3.0)),
}


def gen_gaussian_domain(spec: GaussianDomainSpec, rng: np.random.Generator = None) -> LabeledDataset:
    """``n_per_class`` draws from N(mean_pos, I) labeled +1, then as many from N(mean_neg, I) labeled -1."""
    if rng is None:
        rng = make_rng(spec.seed)
    mp = np.asarray(spec.mean_pos, dtype=float)
    mn = np.asarray(spec.mean_neg, dtype=float)
    n = spec.n_per_class
    x = np.vstack([
        mp + rng.standard_normal((n, mp.size)),
        mn + rng.standard_normal((n, mn.size)),
    ])
    y = np.concatenate([np.ones(n, dtype=np.int8), -np.ones(n, dtype=np.int8)])
    return LabeledDataset(x, y)


# --- IDX ---------------------------------------------------------------------

_IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


class IdxParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class IdxBadMagic(IdxParseError):
    pass


class IdxTruncated(IdxParseError):
    pass


class IdxUnsupportedType(IdxParseError):
    pass


@dataclass(frozen=True)
class IdxTensor:
    dims: tuple
    data: np.ndarray  # flat, row-major, native byte order
    type_code: int = 0x08

    def __post_init__(self):
        if self.type_code not in _IDX_TYPES:
            raise ValueError(f"unsupported IDX type code 0x{self.type_code:02X}")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims, dtype=np.int64)) != np.asarray(self.data).size:
            raise ValueError("product of dims does not match data length")
        object.__setattr__(self, "dims", dims)
        data = np.asarray(self.data).ravel().astype(_IDX_TYPES[self.type_code].newbyteorder("="))
        object.__setattr__(self, "data", data)

    def array(self) -> np.ndarray:
        return self.data.reshape(self.dims)


def read_idx(source: Union[bytes, str, Path]) -> IdxTensor:
    """Parse an IDX byte stream (gzip-compressed streams are accepted).

    A path is read from disk first. Errors name the offending byte offset.
    """
    if isinstance(source, (str, Path)):
        source = Path(source).read_bytes()
    buf = bytes(source)
    if buf[:2] == b"\x1f\x8b":
        buf = gzip.decompress(buf)
    if len(buf) < 4:
        raise IdxTruncated("header shorter than 4 bytes", len(buf))
    if buf[0] != 0 or buf[1] != 0:
        raise IdxBadMagic("first two bytes must be zero", 0 if buf[0] else 1)
    code, ndim = buf[2], buf[3]
    if code not in _IDX_TYPES:
        raise IdxUnsupportedType(f"unsupported type code 0x{code:02X}", 2)
    head = 4 + 4 * ndim
    if len(buf) < head:
        raise IdxTruncated(f"dimension sizes need {head} header bytes, got {len(buf)}", len(buf))
    dims = struct.unpack(f">{ndim}I", buf[4:head])
    dt = _IDX_TYPES[code]
    count = int(np.prod(dims, dtype=np.int64))
    need = head + count * dt.itemsize
    if len(buf) < need:
        raise IdxTruncated(f"payload needs {need - head} bytes, got {len(buf) - head}", len(buf))
    data = np.frombuffer(buf, dtype=dt, count=count, offset=head)
    return IdxTensor(dims, data, code)


def write_idx(tensor: IdxTensor, compress: bool = False) -> bytes:
    dt = _IDX_TYPES[tensor.type_code]
    out = bytes([0, 0, tensor.type_code, len(tensor.dims)])
    out += struct.pack(f">{len(tensor.dims)}I", *tensor.dims)
    out += np.ascontiguousarray(tensor.data, dtype=dt).tobytes()
    return gzip.compress(out, mtime=0) if compress else out


def load_mnist(images_path, labels_path) -> tuple:
    """Images flattened to rows of 0-255 floats, and their digit labels."""
    img = read_idx(images_path)
    lab = read_idx(labels_path)
    x = img.array().reshape(img.dims[0], -1).astype(float)
    digits = lab.array().astype(np.int64)
    if x.shape[0] != digits.shape[0]:
        raise ValueError("image and label files disagree on the item count")
    return x, digits


# --- labels, bias, corruption --------------------------------------------------

def even_odd_labels(digits) -> np.ndarray:
    """Even digits map to +1, odd digits to -1."""
    d = np.asarray(digits)
    if d.size and (d.min() < 0 or d.max() > 9 or not np.all(d == np.round(d))):
        raise ValueError("digit labels must be integers in 0..9")
    return np.where(d.astype(np.int64) % 2 == 0, 1, -1).astype(np.int8)


def selection_bias_filter(data: LabeledDataset, digits, keep: Iterable[int]) -> tuple:
    """Rows whose digit is in ``keep``, in original order.

    Returns the filtered dataset and the matching digit vector.
    """
    digits = np.asarray(digits)
    if digits.shape != (data.n,):
        raise ValueError("digit metadata must align with dataset rows")
    mask = np.isin(digits, list(keep))
    if not mask.any():
        raise ValueError("selection bias filter kept no rows")
    return LabeledDataset(data.features[mask], data.labels[mask]), digits[mask]


def corrupt_gaussian_noise(data, sigma: float, rng: np.random.Generator, clip_lo: float = 0.0, clip_hi: float = 255.0):
    """``clip(x + N(0, sigma^2), clip_lo, clip_hi)`` elementwise; labels untouched."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    x = as_features(data)
    if sigma == 0:
        noisy = x.copy()
    else:
        noisy = np.clip(x + sigma * rng.standard_normal(x.shape), clip_lo, clip_hi)
    if isinstance(data, LabeledDataset):
        return LabeledDataset(noisy, data.labels)
    if isinstance(data, UnlabeledDataset):
        return UnlabeledDataset(noisy)
    return noisy


def scale_pixels(data):
    """Map 0-255 pixel values to [0, 1]."""
    x = as_features(data) / 255.0
    if isinstance(data, LabeledDataset):
        return LabeledDataset(x, data.labels)
    if isinstance(data, UnlabeledDataset):
        return UnlabeledDataset(x)
    return x


# --- synthetic digit images --------------------------------------------------------

@dataclass(frozen=True)
class DigitStyle:
    """Rendering style of synthetic digit images.

    ``plain`` draws bright strokes on a black background, like MNIST.
    ``offset`` adds a random smooth gray background under the strokes.
    ``blend`` takes ``|background - strokes|`` over such a background, the
    grayscale analogue of MNIST-M.
    """

    kind: str = "plain"
    pixel_noise: float = 12.0
    amplitude: float = 255.0
    background_lo: float = 40.0
    background_hi: float = 200.0
    background_slope: float = 15.0
    side: int = 6

    def __post_init__(self):
        if self.kind not in ("plain", "offset", "blend"):
            raise ValueError(f"unknown digit style {self.kind!r}")
        if self.side < 2:
            raise ValueError("image side must be >= 2")


IMAGE_SIDE = 6


def _digit_templates(side: int = IMAGE_SIDE) -> np.ndarray:
    """Ten fixed stroke templates with values in [0, 255]."""
    g = np.linspace(0.0, 1.0, side)
    yy, xx = np.meshgrid(g, g, indexing="ij")
    rng = make_rng(20_19, 7)  # fixed: templates are part of the generator, not the experiment
    out = np.empty((10, side * side))
    for k in range(10):
        img = np.zeros((side, side))
        for _ in range(3):
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            w = rng.uniform(0.12, 0.25)
            img += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * w * w))
        out[k] = 255.0 * img.ravel() / img.max()
    return out


_TEMPLATES = {}


def digit_templates(side: int = IMAGE_SIDE) -> np.ndarray:
    if side not in _TEMPLATES:
        t = _digit_templates(side)
        t.setflags(write=False)
        _TEMPLATES[side] = t
    return _TEMPLATES[side]


def synthetic_digits(n: int, rng: np.random.Generator, style: DigitStyle = DigitStyle(), digits=None) -> tuple:
    """``n`` synthetic digit images (rows of 0-255 pixels) and their digits 0..9.

    Each image is a per-example scaled template plus pixel noise; ``digits``
    fixes the digit of every row instead of drawing them uniformly.
    """
    if digits is None:
        digits = rng.integers(0, 10, size=n)
    digits = np.asarray(digits, dtype=np.int64)
    if digits.shape != (n,):
        raise ValueError("digits must have length n")
    scale = rng.uniform(0.7, 1.0, size=(n, 1))
    strokes = scale * (style.amplitude / 255.0) * digit_templates(style.side)[digits]
    noise = style.pixel_noise * rng.standard_normal(strokes.shape)
    if style.kind == "plain":
        return np.clip(strokes + noise, 0.0, 255.0), digits
    g = np.linspace(-1.0, 1.0, style.side)
    yy, xx = np.meshgrid(g, g, indexing="ij")
    level = rng.uniform(style.background_lo, style.background_hi, size=(n, 1))
    slope = rng.uniform(-style.background_slope, style.background_slope, size=(n, 2))
    bg = np.clip(level + slope[:, :1] * yy.ravel() + slope[:, 1:] * xx.ravel(), 0.0, 255.0)
    if style.kind == "offset":
        x = bg + strokes
    else:
        x = np.abs(bg - strokes)
    return np.clip(x + noise, 0.0, 255.0), digits
