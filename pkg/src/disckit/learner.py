"""Weighted empirical risk minimization over a norm ball.

Training is full-batch projected (sub)gradient descent started at w = 0
with step ``eta0 / sqrt(t + 1)``. It stops early once the objective changes
by at most ``tolerance`` for ``patience`` consecutive epochs. The best
iterate seen is returned, so the achieved objective never exceeds the
objective at the origin.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import (
    HINGE,
    LOGISTIC,
    Hypothesis,
    HypothesisClassSpec,
    InputShapeError,
    Loss,
    as_features,
    sign,
)

__all__ = [
    "DivergenceError",
    "TrainConfig",
    "WeightedSample",
    "train",
    "surrogate_objective",
    "cost_sensitive_sample",
    "cost_sensitive_objective",
]


class DivergenceError(ArithmeticError):
    """Raised when the training objective stops being finite."""


@dataclass(frozen=True)
class TrainConfig:
    surrogate: Loss = HINGE
    max_epochs: int = 2000
    eta0: float = 1.0
    tolerance: float = 1e-7
    patience: int = 5  # consecutive small-change epochs required to stop
    norm_bound: Optional[float] = None  # None -> use the class bound
    shuffle: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.surrogate.kind not in ("hinge", "logistic"):
            raise ValueError("surrogate must be hinge or logistic")
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.norm_bound is not None and not self.norm_bound > 0:
            raise ValueError("norm_bound must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class WeightedSample:
    features: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = as_features(self.features)
        y = np.asarray(self.targets)
        w = np.asarray(self.weights, dtype=float)
        if y.shape != (x.shape[0],) or w.shape != (x.shape[0],):
            raise InputShapeError("features, targets and weights must have matching length")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("targets must be +1 or -1")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.any(w > 0):
            raise ValueError("at least one weight must be positive")
        for name, a in (("features", x), ("targets", y.astype(float)), ("weights", w)):
            a = np.array(a, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @classmethod
    def uniform(cls, features, targets) -> "WeightedSample":
        n = as_features(features).shape[0]
        return cls(features, targets, np.full(n, 1.0 / n))

    @classmethod
    def concat(cls, *samples: "WeightedSample") -> "WeightedSample":
        return cls(
            np.vstack([s.features for s in samples]),
            np.concatenate([s.targets for s in samples]),
            np.concatenate([s.weights for s in samples]),
        )


def surrogate_objective(w: np.ndarray, phi: np.ndarray, y: np.ndarray, c: np.ndarray, loss: Loss) -> float:
    return float(c @ loss(phi @ w, y))


def _subgradient(score, phi, y, c, loss: Loss) -> np.ndarray:
    """Subgradient at the iterate whose scores ``phi @ w`` are ``score``."""
    m = y * score
    if loss.kind == "hinge":
        # margin exactly 1 takes the zero branch
        coef = np.where(m < 1.0, -1.0, 0.0)
    else:
        # d/dm log(1 + e^-m) = -sigmoid(-m)
        coef = -np.exp(-np.logaddexp(0.0, m))
    return phi.T @ (c * coef * y)


def _project(w: np.ndarray, radius: float) -> np.ndarray:
    nrm = np.linalg.norm(w)
    if nrm > radius:
        return w * (radius / nrm)
    return w


def train(sample: WeightedSample, cls: HypothesisClassSpec, cfg: TrainConfig = TrainConfig(), trace: Optional[list] = None) -> Hypothesis:
    """Minimize ``sum_i c_i * loss(h(x_i), y_i)`` over ``||w||_2 <= radius``.

    If ``trace`` is a list, every iterate's weight vector is appended to it.
    """
    phi = cls.basis.transform(sample.features)
    y = sample.targets
    c = sample.weights
    if cfg.shuffle:
        order = np.random.default_rng(cfg.seed).permutation(sample.n)
        phi, y, c = phi[order], y[order], c[order]
    radius = cfg.norm_bound if cfg.norm_bound is not None else cls.norm_bound
    loss = cfg.surrogate

    w = np.zeros(phi.shape[1])
    score = phi @ w
    f = float(c @ loss(score, y))
    best_w, best_f = w, f
    quiet = 0
    for t in range(cfg.max_epochs):
        g = _subgradient(score, phi, y, c, loss)
        if not np.any(g):
            break
        w = _project(w - cfg.eta0 / np.sqrt(t + 1.0) * g, radius)
        score = phi @ w
        f_new = float(c @ loss(score, y))
        if not np.isfinite(f_new) or not np.all(np.isfinite(w)):
            raise DivergenceError(f"objective became non-finite at epoch {t}")
        if trace is not None:
            trace.append(w)
        if f_new < best_f:
            best_w, best_f = w, f_new
        # a single flat step is common under subgradient oscillation, so
        # stopping needs a run of them
        quiet = quiet + 1 if abs(f - f_new) <= cfg.tolerance else 0
        f = f_new
        if quiet >= cfg.patience:
            break
    return Hypothesis(best_w, cls.basis)


def cost_sensitive_sample(h_ref: Hypothesis, source_x, target_x) -> tuple:
    """Pseudo-labeled source and target samples for the cost-sensitive step.

    Source inputs get ``sign(h_ref(x))`` with weight ``1/n_S``; target inputs
    get ``-sign(h_ref(x))`` with weight ``1/n_T``.
    """
    xs = as_features(source_x)
    xt = as_features(target_x)
    s_tilde = WeightedSample.uniform(xs, h_ref.predict(xs))
    t_tilde = WeightedSample.uniform(xt, -h_ref.predict(xt))
    return s_tilde, t_tilde


def _check_uniform(s: WeightedSample, what: str) -> None:
    if not np.allclose(s.weights, 1.0 / s.n, rtol=0, atol=1e-15):
        raise ValueError(f"{what} weights must all equal 1/n")


def cost_sensitive_objective(h: Hypothesis, pseudo_s: WeightedSample, pseudo_t: WeightedSample, loss: Loss) -> float:
    """Two-term objective: mean loss on pseudo-source plus mean loss on pseudo-target."""
    _check_uniform(pseudo_s, "pseudo-source")
    _check_uniform(pseudo_t, "pseudo-target")
    total = 0.0
    for s in (pseudo_s, pseudo_t):
        total += float(np.mean(loss(h.score(s.features), s.targets)))
    return total
