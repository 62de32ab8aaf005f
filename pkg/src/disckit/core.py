"""Shared types, losses and empirical risks.

Every hypothesis in this package is linear in its parameters,
``h(x) = w . phi(x)``, and predicts ``sign(h(x))`` with ``sign(0) = +1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "InputShapeError",
    "LabeledDataset",
    "UnlabeledDataset",
    "BasisSpec",
    "Hypothesis",
    "HypothesisClassSpec",
    "Loss",
    "ZERO_ONE",
    "HINGE",
    "LOGISTIC",
    "sign",
    "as_features",
    "empirical_risk",
    "exact_zero_one_risk",
    "negate",
    "default_norm_bound",
]


class InputShapeError(ValueError):
    """Raised when arrays that must line up do not."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def sign(z) -> np.ndarray:
    """Elementwise sign with ``sign(0) = +1``; returns int8 in {-1, +1}."""
    z = np.asarray(z)
    return np.where(z >= 0, 1, -1).astype(np.int8)


def _check_features(x, what="features") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InputShapeError(f"{what} must be a 2-D matrix, got shape {x.shape}")
    if x.shape[0] < 1:
        raise InputShapeError(f"{what} must have at least one row")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contain non-finite values")
    return x


@dataclass(frozen=True)
class UnlabeledDataset:
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(_check_features(self.features)))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = _check_features(self.features)
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise InputShapeError(
                f"labels shape {y.shape} does not match {x.shape[0]} feature rows"
            )
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be exactly +1 or -1")
        y = np.array(y, dtype=np.int8, copy=True)
        y.setflags(write=False)
        object.__setattr__(self, "features", _frozen(x))
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def unlabeled(self) -> UnlabeledDataset:
        return UnlabeledDataset(self.features)


Dataset = Union[LabeledDataset, UnlabeledDataset]


def as_features(data) -> np.ndarray:
    """Feature matrix of a dataset or a raw array (1-D arrays become one column)."""
    if isinstance(data, (LabeledDataset, UnlabeledDataset)):
        return data.features
    return _check_features(data)


_BASIS_KINDS = ("identity", "affine", "precomputed")


@dataclass(frozen=True)
class BasisSpec:
    """Fixed feature map ``phi``.

    ``identity`` and ``precomputed`` pass features through unchanged (the
    latter documents that the caller already applied a map); ``affine``
    appends a constant 1 so the class contains biased hyperplanes.
    ``feature_bound`` is a per-example Euclidean bound on ``phi(x)``.
    """

    kind: str
    input_dim: int
    feature_bound: float

    def __post_init__(self):
        if self.kind not in _BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if not self.feature_bound > 0:
            raise ValueError("feature_bound must be positive")

    @property
    def output_dim(self) -> int:
        return self.input_dim + 1 if self.kind == "affine" else self.input_dim

    def transform(self, x) -> np.ndarray:
        x = as_features(x)
        if x.shape[1] != self.input_dim:
            raise InputShapeError(
                f"basis expects {self.input_dim} input columns, got {x.shape[1]}"
            )
        if self.kind == "affine":
            return np.hstack([x, np.ones((x.shape[0], 1))])
        return x

    def check_bound(self, x, rtol: float = 1e-12) -> None:
        norms = np.linalg.norm(self.transform(x), axis=1)
        worst = float(norms.max())
        if worst > self.feature_bound * (1 + rtol):
            raise ValueError(
                f"||phi(x)||_2 = {worst:.6g} exceeds feature_bound {self.feature_bound:.6g}"
            )

    @classmethod
    def fit(cls, kind: str, *datasets) -> "BasisSpec":
        """Smallest basis of ``kind`` whose bound covers every row of ``datasets``."""
        xs = [as_features(d) for d in datasets]
        dim = xs[0].shape[1]
        probe = cls(kind, dim, 1.0)
        bound = max(float(np.linalg.norm(probe.transform(x), axis=1).max()) for x in xs)
        return cls(kind, dim, bound if bound > 0 else 1.0)


@dataclass(frozen=True, eq=False)
class Hypothesis:
    weights: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.shape[0] != self.basis.output_dim:
            raise InputShapeError(
                f"weights of length {w.shape[0]} do not fit basis of dim {self.basis.output_dim}"
            )
        object.__setattr__(self, "weights", _frozen(w))

    def score(self, x) -> np.ndarray:
        return self.basis.transform(x) @ self.weights

    def predict(self, x) -> np.ndarray:
        return sign(self.score(x))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))

    def __neg__(self) -> "Hypothesis":
        return negate(self)

    def same_as(self, other: "Hypothesis") -> bool:
        return self.basis == other.basis and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"Hypothesis(weights={np.array2string(self.weights, precision=4)}, basis={self.basis.kind})"


def negate(h: Hypothesis) -> Hypothesis:
    # 0.0 - w keeps zero weights as +0.0
    return Hypothesis(0.0 - h.weights, h.basis)


@dataclass(frozen=True)
class HypothesisClassSpec:
    """The class ``{x -> w . phi(x) : ||w||_2 <= norm_bound}``.

    ``grid``, when given, is a finite symmetric subset used by the exact
    enumeration oracles.
    """

    basis: BasisSpec
    norm_bound: float
    grid: Optional[tuple] = field(default=None)

    def __post_init__(self):
        if not self.norm_bound > 0:
            raise ValueError("norm_bound must be positive")
        if self.grid is not None:
            grid = tuple(self.grid)
            if not grid:
                raise ValueError("grid must be nonempty")
            object.__setattr__(self, "grid", grid)
            self._validate_grid(grid)

    def _validate_grid(self, grid) -> None:
        w = np.stack([h.weights for h in grid])
        if any(h.basis != self.basis for h in grid):
            raise ValueError("grid hypotheses must share the class basis")
        if np.any(np.linalg.norm(w, axis=1) > self.norm_bound * (1 + 1e-12)):
            raise ValueError("grid member violates the norm bound")
        keys = {tuple(row) for row in w}
        for row in w:
            if tuple(0.0 - row) not in keys:
                raise ValueError("grid is not closed under negation")

    def grid_weights(self) -> np.ndarray:
        if self.grid is None:
            raise ValueError("hypothesis class has no enumeration grid")
        return np.stack([h.weights for h in self.grid])

    def with_grid(self, grid) -> "HypothesisClassSpec":
        return HypothesisClassSpec(self.basis, self.norm_bound, tuple(grid))

    def default_norm_bound(self) -> float:
        return default_norm_bound(self.basis)


def default_norm_bound(basis: BasisSpec) -> float:
    return 100.0 * (1.0 + 1.0 / basis.feature_bound)


_LOSS_KINDS = ("zero_one", "hinge", "logistic")


@dataclass(frozen=True)
class Loss:
    kind: str

    def __post_init__(self):
        if self.kind not in _LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}")

    def __call__(self, y, y_ref) -> np.ndarray:
        """Pointwise loss of prediction score ``y`` against reference ``y_ref``."""
        if self.kind == "zero_one":
            # compare signs, not the product: a zero score predicts +1
            return (sign(y) != sign(y_ref)).astype(float)
        m = np.asarray(y, dtype=float) * np.asarray(y_ref, dtype=float)
        if self.kind == "hinge":
            return np.maximum(0.0, 1.0 - m)
        return np.logaddexp(0.0, -m)


ZERO_ONE = Loss("zero_one")
HINGE = Loss("hinge")
LOGISTIC = Loss("logistic")


def _reference_labels(reference, x) -> np.ndarray:
    if isinstance(reference, Hypothesis):
        return reference.predict(x).astype(float)
    ref = np.asarray(reference, dtype=float)
    if ref.ndim == 0:
        return np.full(x.shape[0], float(ref))
    if ref.ndim != 1 or ref.shape[0] != x.shape[0]:
        raise InputShapeError(
            f"reference of shape {ref.shape} does not match {x.shape[0]} rows"
        )
    # references are hardened to +-1
    return sign(ref).astype(float)


def empirical_risk(h: Hypothesis, data, reference=None, loss: Loss = ZERO_ONE) -> float:
    """Mean loss of ``h`` on ``data`` against a reference.

    ``reference`` is a +-1 label vector, a scalar label, or another
    hypothesis (used through its sign). For a ``LabeledDataset`` it defaults
    to the dataset labels.
    """
    x = as_features(data)
    if reference is None:
        if not isinstance(data, LabeledDataset):
            raise ValueError("a reference is required for unlabeled data")
        reference = data.labels
    ref = _reference_labels(reference, x)
    return float(np.mean(loss(h.score(x), ref)))


def exact_zero_one_risk(h: Hypothesis, data, reference=None) -> Fraction:
    """0-1 risk as an exact fraction ``mistakes / n``."""
    x = as_features(data)
    if reference is None:
        reference = data.labels
    ref = _reference_labels(reference, x)
    return Fraction(int(np.count_nonzero(h.predict(x) != ref)), x.shape[0])
