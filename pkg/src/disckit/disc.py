"""Discrepancy estimators and exact enumeration oracles.

Empirical 0-1 risks are counted in integers, so sup-form and min-form
values built from the same counts agree to the last bit.

Naming: ``source`` is the labeled sample S, ``target`` the unlabeled
sample T, and ``h_ref`` the hypothesis that plays the role of the source
risk minimizer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    BasisSpec,
    Hypothesis,
    HypothesisClassSpec,
    LabeledDataset,
    as_features,
    default_norm_bound,
    sign,
)
from .learner import (
    TrainConfig,
    WeightedSample,
    cost_sensitive_sample,
    train,
)

__all__ = [
    "DiscrepancyReport",
    "GridTooLargeError",
    "default_class",
    "direction_net",
    "threshold_grid",
    "threshold_grid_1d",
    "direction_threshold_grid",
    "fixed_ref_disc",
    "fixed_ref_disc_sweep",
    "sdisc_bruteforce",
    "estimate_sdisc",
    "estimate_dh",
    "xdisc_bruteforce",
    "SdpProblemData",
    "build_xdisc_sdp",
    "SourceRanking",
    "rank_sources",
]

XDISC_GRID_CAP = 2000


class GridTooLargeError(ValueError):
    pass


@dataclass
class DiscrepancyReport:
    measure: str
    value: float
    reference_hypothesis: Optional[Hypothesis] = None
    witness: object = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def params(w):
            if w is None:
                return None
            if isinstance(w, Hypothesis):
                return [float(v) for v in w.weights]
            return [params(h) for h in w]

        return {
            "measure": self.measure,
            "value": float(self.value),
            "witness_params": params(self.witness),
            "reference_params": params(self.reference_hypothesis),
            "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def default_class(*datasets, kind: str = "affine", norm_bound: Optional[float] = None) -> HypothesisClassSpec:
    """Linear class whose feature bound covers every row of ``datasets``."""
    basis = BasisSpec.fit(kind, *datasets)
    return HypothesisClassSpec(basis, norm_bound or default_norm_bound(basis))


# --- grids -----------------------------------------------------------------------

def direction_net(count: int, dim: int) -> np.ndarray:
    """Deterministic unit directions covering the sphere in ``dim`` dimensions.

    1-D gives {+1, -1}; 2-D gives ``count`` equally spaced angles; 3-D a
    Fibonacci lattice; higher dimensions fall back to normalized Gaussian
    draws from a fixed stream.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        a = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(a), np.sin(a)])
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5 ** 0.5) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(dim))).standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _thresholds(z: np.ndarray) -> np.ndarray:
    u = np.unique(z)
    mids = (u[:-1] + u[1:]) / 2
    return np.concatenate([[u[0] - 1.0], mids, [u[-1] + 1.0]])


def _halfspace_pair(u, t, basis: BasisSpec) -> tuple:
    w = np.append(u, -t)
    w = w / np.linalg.norm(w)
    h = Hypothesis(w, basis)
    return h, Hypothesis(0.0 - w, basis)


def threshold_grid(thresholds, feature_bound: float) -> tuple:
    """``sign(x - t)`` and its negation for each ``t``, over a 1-D affine basis."""
    basis = BasisSpec("affine", 1, float(feature_bound))
    grid = []
    for t in np.asarray(thresholds, dtype=float).ravel():
        grid.extend(_halfspace_pair(np.array([1.0]), t, basis))
    return tuple(grid)


def threshold_grid_1d(*datasets) -> tuple:
    """Every threshold classifier on the line, up to behaviour on the data.

    Thresholds sit at midpoints of consecutive pooled values plus one
    sentinel below the minimum and one above the maximum; each comes with its
    negation. Weights are unit-norm over an affine basis.
    """
    if as_features(datasets[0]).shape[1] != 1:
        raise ValueError("threshold_grid_1d needs one-dimensional inputs")
    pooled = np.concatenate([as_features(d).ravel() for d in datasets])
    return threshold_grid(_thresholds(pooled), 1.0 + float(np.abs(pooled).max()))


def direction_threshold_grid(*datasets, directions: np.ndarray, max_thresholds: Optional[int] = None) -> tuple:
    """Halfspaces ``u . x - t`` for each direction ``u`` and data-midpoint threshold ``t``.

    With ``max_thresholds`` the per-direction thresholds are thinned to an
    evenly spaced subset (always keeping both sentinels).
    """
    pooled = np.vstack([as_features(d) for d in datasets])
    basis = BasisSpec("affine", pooled.shape[1], 1.0 + float(np.linalg.norm(pooled, axis=1).max()))
    grid = []
    for u in directions:
        ts = _thresholds(pooled @ u)
        if max_thresholds is not None and ts.size > max_thresholds:
            idx = np.unique(np.round(np.linspace(0, ts.size - 1, max_thresholds)).astype(int))
            ts = ts[idx]
        for t in ts:
            grid.extend(_halfspace_pair(u, t, basis))
    return tuple(grid)


def _require_grid(cls: HypothesisClassSpec):
    if cls is None or cls.grid is None:
        raise ValueError("this oracle needs a hypothesis class with an enumeration grid")
    return cls.grid


def _grid_predictions(grid, x: np.ndarray) -> np.ndarray:
    """n x G matrix of +-1 predictions."""
    w = np.stack([h.weights for h in grid])
    return sign(grid[0].basis.transform(x) @ w.T)


# --- fixed-reference discrepancy --------------------------------------------------

def _mistake_counts(pred: np.ndarray, ref: np.ndarray) -> np.ndarray:
    return np.count_nonzero(pred != ref[:, None], axis=0).astype(np.int64)


def fixed_ref_disc(h_ref: Hypothesis, x1, x2, cls: HypothesisClassSpec) -> tuple:
    """``max_h |R1(h, h_ref) - R2(h, h_ref)|`` over the class grid, 0-1 loss.

    Returns ``(value, witness)``; the witness attains the maximum with the
    first sample's risk on top (lowest grid index on ties).
    """
    grid = _require_grid(cls)
    a, b = as_features(x1), as_features(x2)
    n1, n2 = a.shape[0], b.shape[0]
    c1 = _mistake_counts(_grid_predictions(grid, a), h_ref.predict(a))
    c2 = _mistake_counts(_grid_predictions(grid, b), h_ref.predict(b))
    num = c1 * n2 - c2 * n1
    k = int(np.argmax(np.abs(num)))
    witness = grid[k] if num[k] >= 0 else -grid[k]
    return abs(int(num[k])) / (n1 * n2), witness


def fixed_ref_disc_sweep(h_ref: Hypothesis, x1, x2, directions: np.ndarray) -> tuple:
    """Same maximum as :func:`fixed_ref_disc` over the halfspace grid built by
    :func:`direction_threshold_grid`, computed by sorting each projection once.

    Returns ``(value, (direction_index, threshold, orientation))``.
    """
    a, b = as_features(x1), as_features(x2)
    n1, n2 = a.shape[0], b.shape[0]
    x = np.vstack([a, b])
    r = np.concatenate([h_ref.predict(a), h_ref.predict(b)])
    in1 = np.concatenate([np.ones(n1, bool), np.zeros(n2, bool)])
    z = x @ np.asarray(directions, dtype=float).T  # n x K
    order = np.argsort(z, axis=0, kind="stable")
    zs = np.take_along_axis(z, order, axis=0)
    rs = r[order]
    d1 = in1[order]
    # predicting +1 above the cut: mistakes = (+1 refs at or below) + (-1 refs above)
    pos1 = np.cumsum((rs == 1) & d1, axis=0)
    pos2 = np.cumsum((rs == 1) & ~d1, axis=0)
    neg1 = np.cumsum((rs == -1) & d1, axis=0)
    neg2 = np.cumsum((rs == -1) & ~d1, axis=0)
    zero = np.zeros((1, z.shape[1]), dtype=np.int64)
    pos1, pos2, neg1, neg2 = (np.vstack([zero, c]) for c in (pos1, pos2, neg1, neg2))
    m1 = pos1 + (neg1[-1] - neg1)
    m2 = pos2 + (neg2[-1] - neg2)
    num = m1.astype(np.int64) * n2 - m2.astype(np.int64) * n1
    # a cut is only realizable between distinct projected values
    valid = np.ones_like(num, dtype=bool)
    valid[1:-1] = zs[1:] > zs[:-1]
    score = np.where(valid, np.abs(num), -1)
    flat = int(np.argmax(score.T.ravel()))  # direction-major, first hit wins
    k, pos = divmod(flat, score.shape[0])
    col = zs[:, k]
    if pos == 0:
        t = col[0] - 1.0
    elif pos == col.size:
        t = col[-1] + 1.0
    else:
        t = (col[pos - 1] + col[pos]) / 2
    orient = 1 if num[pos, k] >= 0 else -1
    return abs(int(num[pos, k])) / (n1 * n2), (k, float(t), orient)


def _min_j_counts(grid, h_ref, xs, xt) -> tuple:
    """Integer numerators of ``J01(h) * n_S * n_T`` over the grid."""
    ns, nt = xs.shape[0], xt.shape[0]
    ms = _mistake_counts(_grid_predictions(grid, xs), h_ref.predict(xs))
    mt = _mistake_counts(_grid_predictions(grid, xt), -h_ref.predict(xt))
    jnum = ms * nt + mt * ns
    k = int(np.argmin(jnum))
    return int(jnum[k]), k, int(ms[k]), int(mt[k])


def _train_source(source: LabeledDataset, cls, cfg) -> Hypothesis:
    return train(WeightedSample.uniform(source.features, source.labels), cls, cfg)


def sdisc_bruteforce(source: LabeledDataset, target, cls: HypothesisClassSpec, cfg: TrainConfig = TrainConfig(), h_ref: Optional[Hypothesis] = None) -> DiscrepancyReport:
    """Exact empirical S-disc over the class grid.

    The reference is trained on ``source`` unless given. Diagnostics carry
    the min-form ``J_value`` computed from its own counts.
    """
    grid = _require_grid(cls)
    if h_ref is None:
        h_ref = _train_source(source, cls, cfg)
    xs, xt = source.features, as_features(target)
    value, witness = fixed_ref_disc(h_ref, xt, xs, cls)
    jnum, k, ms, mt = _min_j_counts(grid, h_ref, xs, xt)
    ns, nt = xs.shape[0], xt.shape[0]
    return DiscrepancyReport(
        "sdisc",
        value,
        reference_hypothesis=h_ref,
        witness=witness,
        diagnostics={
            "J_value": jnum / (ns * nt),
            "sdisc_from_J": (ns * nt - jnum) / (ns * nt),
            "risk_source": ms / ns,
            "risk_target_negated": mt / nt,
            "clamped": False,
            "grid_size": len(grid),
        },
    )


def _j01_many(weights: np.ndarray, basis: BasisSpec, xs, ys, xt, yt, chunk: int = 512) -> np.ndarray:
    """Integer J01 numerators ``mistakes_S * n_T + mistakes_T * n_S`` for each weight row."""
    ps, pt = basis.transform(xs), basis.transform(xt)
    ns, nt = ps.shape[0], pt.shape[0]
    out = np.empty(weights.shape[0], dtype=np.int64)
    for i in range(0, weights.shape[0], chunk):
        w = weights[i:i + chunk].T
        ms = np.count_nonzero(sign(ps @ w) != ys[:, None], axis=0)
        mt = np.count_nonzero(sign(pt @ w) != yt[:, None], axis=0)
        out[i:i + chunk] = ms.astype(np.int64) * nt + mt.astype(np.int64) * ns
    return out


def _best_candidate(sample: WeightedSample, cls, cfg, extra: Sequence[Hypothesis], xs, ys, xt, yt, candidates: str):
    """Train on ``sample`` and return the candidate with the smallest J01.

    ``candidates='endpoints'`` compares the trained hypothesis with ``extra``;
    ``'path'`` also includes every iterate of the descent.
    """
    if candidates not in ("endpoints", "path"):
        raise ValueError("candidates must be 'endpoints' or 'path'")
    path = []
    h2 = train(sample, cls, cfg, trace=path if candidates == "path" else None)
    cands = [h2.weights] + [h.weights for h in extra] + path
    jn = _j01_many(np.stack(cands), cls.basis, xs, ys, xt, yt)
    k = int(np.argmin(jn))  # first index wins ties, so h2 is preferred
    best = h2 if k == 0 else Hypothesis(cands[k], cls.basis)
    origin = "trained" if k == 0 else ("fixed" if k <= len(extra) else "path")
    return h2, best, int(jn[0]), int(jn[k]), origin


def estimate_sdisc(source: LabeledDataset, target, cls: Optional[HypothesisClassSpec] = None, cfg: TrainConfig = TrainConfig(), candidates: str = "path") -> DiscrepancyReport:
    """Empirical S-disc for the 0-1 loss by cost-sensitive learning.

    1. train the source classifier on ``source``;
    2. pseudo-label source inputs with its sign and target inputs with the
       opposite sign;
    3. train a second classifier on the pooled pseudo-labels with weights
       1/n_S and 1/n_T;
    4. return ``1 - J01`` at the best candidate.

    The candidate set always holds the second classifier and +-(source
    classifier), whose J01 is exactly 1, so the value is never negative.
    ``candidates='path'`` (default) also scores each descent iterate.
    """
    xt = as_features(target)
    if cls is None:
        cls = default_class(source, xt)
    h_s = _train_source(source, cls, cfg)
    s_tilde, t_tilde = cost_sensitive_sample(h_s, source.features, xt)
    pooled = WeightedSample.concat(s_tilde, t_tilde)
    ys, yt = s_tilde.targets, t_tilde.targets
    h2, best, j_trained, j_best, origin = _best_candidate(
        pooled, cls, cfg, [h_s, -h_s], source.features, ys, xt, yt, candidates
    )
    ns, nt = source.n, xt.shape[0]
    denom = ns * nt
    raw = (denom - j_best) / denom
    value = min(max(raw, 0.0), 1.0)
    ps = best.predict(source.features)
    pt = best.predict(xt)
    return DiscrepancyReport(
        "sdisc",
        value,
        reference_hypothesis=h_s,
        witness=best,
        diagnostics={
            "J_value": j_best / denom,
            "J_trained": j_trained / denom,
            "risk_source": float(np.mean(ps != ys)),
            "risk_target_negated": float(np.mean(pt != yt)),
            "candidate": origin,
            "fallback": origin != "trained",
            "clamped": value != raw,
            "candidates": candidates,
        },
    )


def estimate_dh(source_x, target, cls: Optional[HypothesisClassSpec] = None, cfg: TrainConfig = TrainConfig(), candidates: str = "path") -> DiscrepancyReport:
    """Empirical d_H from a domain classifier.

    Target inputs are labeled -1 and source inputs +1, weighted 1/n_T and
    1/n_S. The value is ``1 - min_h [R_T(h, -1) + R_S(h, +1)]`` over the
    trained classifier, the constant predictors and (with ``'path'``) the
    descent iterates, clamped to [0, 1].
    """
    xs, xt = as_features(source_x), as_features(target)
    if cls is None:
        cls = default_class(xs, xt)
    ns, nt = xs.shape[0], xt.shape[0]
    sample = WeightedSample.concat(
        WeightedSample.uniform(xt, -np.ones(nt)),
        WeightedSample.uniform(xs, np.ones(ns)),
    )
    p = cls.basis.output_dim
    constants = [Hypothesis(np.zeros(p), cls.basis)]
    if cls.basis.kind == "affine":
        e = np.zeros(p)
        e[-1] = 1.0
        constants = [Hypothesis(e, cls.basis), Hypothesis(-e, cls.basis)]
    ys, yt = np.ones(ns), -np.ones(nt)
    h2, best, j_trained, j_best, origin = _best_candidate(
        sample, cls, cfg, constants, xs, ys, xt, yt, candidates
    )
    denom = ns * nt
    raw = (denom - j_best) / denom
    value = min(max(raw, 0.0), 1.0)
    return DiscrepancyReport(
        "dh",
        value,
        witness=best,
        diagnostics={
            "J_value": j_best / denom,
            "J_trained": j_trained / denom,
            "risk_target_as_source": float(np.mean(best.predict(xt) != -1)),
            "risk_source_as_target": float(np.mean(best.predict(xs) != 1)),
            "candidate": origin,
            "clamped": value != raw,
            "candidates": candidates,
        },
    )


def xdisc_bruteforce(source_x, target, cls: Optional[HypothesisClassSpec] = None, cap: int = XDISC_GRID_CAP, chunk: int = 512) -> DiscrepancyReport:
    """``max_{h, h'} |R_T(h, h') - R_S(h, h')|`` over all ordered grid pairs.

    Without a grid, 1-D inputs get the exact threshold grid.
    """
    xs, xt = as_features(source_x), as_features(target)
    if cls is None or cls.grid is None:
        if xs.shape[1] != 1:
            raise ValueError("xdisc_bruteforce needs a grid for inputs of dimension > 1")
        grid = threshold_grid_1d(xs, xt)
    else:
        grid = cls.grid
    if len(grid) > cap:
        raise GridTooLargeError(
            f"grid of {len(grid)} members gives {len(grid) ** 2} pairs; cap is {cap} members. "
            "Subsample the grid (e.g. fewer directions or max_thresholds)."
        )
    ns, nt = xs.shape[0], xt.shape[0]
    ps = _grid_predictions(grid, xs).astype(np.float64)
    pt = _grid_predictions(grid, xt).astype(np.float64)
    g = len(grid)
    best, i, j = -1, 0, 0
    # row blocks keep memory at block x G; the first maximum in row-major
    # order wins, as a single global argmax would pick
    for lo in range(0, g, chunk):
        hi = min(lo + chunk, g)
        # agreements count exactly in float64 for any realistic n
        agree_s = np.rint((ps[:, lo:hi].T @ ps + ns) / 2).astype(np.int64)
        agree_t = np.rint((pt[:, lo:hi].T @ pt + nt) / 2).astype(np.int64)
        # disagreement counts -> risk numerators over the common denominator
        num = np.abs((nt - agree_t) * ns - (ns - agree_s) * nt)
        k = int(np.argmax(num))
        if num.flat[k] > best:
            best = int(num.flat[k])
            i, j = lo + k // g, k % g
    return DiscrepancyReport(
        "xdisc_bruteforce",
        best / (ns * nt),
        witness=(grid[i], grid[j]),
        diagnostics={"grid_size": len(grid), "pairs": len(grid) ** 2},
    )


# --- SDP problem data ------------------------------------------------------------------

@dataclass(frozen=True)
class SdpProblemData:
    a: np.ndarray
    c: np.ndarray
    f: np.ndarray  # N x (N + 2p), row i is f_i
    phi_mats: np.ndarray  # N x (N + 2p) x (N + 2p)
    n_target: int
    n_source: int
    p: int

    @property
    def N(self) -> int:
        return self.n_target + self.n_source


SDP_SIZE_LIMIT = 50_000_000


def build_xdisc_sdp(source_x, target, basis: BasisSpec) -> SdpProblemData:
    """Problem data of the hinge-loss X-disc QCQP and its SDP relaxation.

    ``z = [xi; beta; beta']``; the objective is ``c . z``; constraint ``i``
    reads ``f_i . z >= 0`` and ``z' Phi_i z + f_i . z >= 1``. Rows are
    ordered target first, then source, matching the sign pattern of ``a``.
    Nothing is solved.
    """
    xs, xt = as_features(source_x), as_features(target)
    nt, ns = xt.shape[0], xs.shape[0]
    N = nt + ns
    phis = np.vstack([basis.transform(xt), basis.transform(xs)])
    p = phis.shape[1]
    m = N + 2 * p
    if N * m * m > SDP_SIZE_LIMIT:
        raise OverflowError(f"SDP data would hold {N * m * m} entries (limit {SDP_SIZE_LIMIT})")
    a = np.concatenate([np.full(nt, 1.0 / nt), np.full(ns, -1.0 / ns)])
    c = np.concatenate([a, np.zeros(2 * p)])
    f = np.zeros((N, m))
    f[np.arange(N), np.arange(N)] = 1.0
    mats = np.zeros((N, m, m))
    outer = 0.5 * np.einsum("ni,nj->nij", phis, phis)
    mats[:, N:N + p, N + p:] = outer
    mats[:, N + p:, N:N + p] = outer
    for arr in (a, c, f, mats):
        arr.setflags(write=False)
    return SdpProblemData(a, c, f, mats, nt, ns, p)


# --- source ranking ----------------------------------------------------------------------

@dataclass
class SourceRanking:
    measure: str
    values: list  # per input source; None where the estimator failed
    order: list  # source indices, best first
    ranks: list  # rank of each input source, 1 = best
    errors: dict
    ties: list  # groups of source indices with equal values
    clean_in_top: Optional[int] = None
    top_k: int = 5

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "values": self.values,
            "order": self.order,
            "ranks": self.ranks,
            "errors": {str(k): v for k, v in self.errors.items()},
            "ties": self.ties,
            "clean_in_top": self.clean_in_top,
            "top_k": self.top_k,
        }


_MEASURES = ("sdisc", "dh", "xdisc")


def _measure(measure, source: LabeledDataset, target, cls, cfg, candidates):
    if measure == "sdisc":
        return estimate_sdisc(source, target, cls, cfg, candidates=candidates)
    if measure == "dh":
        return estimate_dh(source.features, target, cls, cfg, candidates=candidates)
    return xdisc_bruteforce(source.features, target, cls)


def rank_sources(target, sources: Sequence[LabeledDataset], measure: str = "sdisc", cls: Optional[HypothesisClassSpec] = None, cfg: TrainConfig = TrainConfig(), clean: Optional[Sequence[bool]] = None, top_k: int = 5, candidates: str = "path") -> SourceRanking:
    """Rank sources by ascending discrepancy to ``target``.

    Ties keep input order and are listed in ``ties``. A source whose
    estimator raises is reported in ``errors`` and ranked last. With
    ``clean`` tags, ``clean_in_top`` counts clean sources among the first
    ``top_k``.
    """
    if measure not in _MEASURES:
        raise ValueError(f"measure must be one of {_MEASURES}")
    if len(sources) < 1:
        raise ValueError("need at least one source")
    xt = as_features(target)
    values, errors = [], {}
    for i, s in enumerate(sources):
        try:
            c = cls if cls is not None else (default_class(s, xt) if measure != "xdisc" else None)
            values.append(_measure(measure, s, xt, c, cfg, candidates).value)
        except (ValueError, ArithmeticError) as exc:
            values.append(None)
            errors[i] = f"{type(exc).__name__}: {exc}"
    key = [(v is None, v if v is not None else 0.0, i) for i, v in enumerate(values)]
    order = [i for _, _, i in sorted(key)]
    ranks = [0] * len(values)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    ties, seen = [], {}
    for i, v in enumerate(values):
        if v is not None:
            seen.setdefault(v, []).append(i)
    ties = [g for g in seen.values() if len(g) > 1]
    clean_in_top = None
    if clean is not None:
        if len(clean) != len(sources):
            raise ValueError("clean tags must match the number of sources")
        clean_in_top = sum(bool(clean[i]) for i in order[:top_k])
    return SourceRanking(measure, values, order, ranks, errors, ties, clean_in_top, top_k)
