"""Desk-scale experiment harnesses: toy Gaussians, empirical convergence,
source selection under noise corruption, and timing.

Each harness is a pure function of its arguments and seed (timings aside)
and returns plain rows (lists of dicts) ready for CSV or JSON output.
Random streams are ``make_rng(seed, *keys)`` with keys fixed per role, so
e.g. source ``k`` of repetition ``r`` is the same array whatever else runs.
"""
from __future__ import annotations

import statistics
import time
from typing import Optional, Sequence

import numpy as np

from .core import HypothesisClassSpec, LabeledDataset, UnlabeledDataset, empirical_risk
from .disc import (
    default_class,
    direction_net,
    direction_threshold_grid,
    estimate_dh,
    estimate_sdisc,
    rank_sources,
    xdisc_bruteforce,
)
from .ingest import (
    TOY_MEANS,
    DigitStyle,
    GaussianDomainSpec,
    corrupt_gaussian_noise,
    even_odd_labels,
    gen_gaussian_domain,
    make_rng,
    scale_pixels,
    synthetic_digits,
)
from .learner import TrainConfig

__all__ = [
    "TOY_DOMAINS",
    "toy_domains",
    "run_toy",
    "toy_points",
    "DigitPool",
    "synthetic_pool",
    "run_convergence",
    "SELECTION_TARGET_STYLE",
    "SELECTION_SOURCE_STYLE",
    "SELECTION_CFG",
    "selection_task",
    "run_source_selection",
    "run_bench",
    "BENCH_NOTE",
    "BENCH_GRID_CAP",
]

TOY_DOMAINS = ("S1", "S2", "T")


# --- toy ----------------------------------------------------------------------

def toy_domains(seed: int, n_per_class: int = 200) -> dict:
    """The three 2-D Gaussian domains, each from its own stream."""
    out = {}
    for i, name in enumerate(TOY_DOMAINS):
        pos, neg = TOY_MEANS[name]
        out[name] = gen_gaussian_domain(GaussianDomainSpec(pos, neg, n_per_class, seed), make_rng(seed, 0, i))
    return out


def run_toy(seed: int, n_per_class: int = 200, cfg: TrainConfig = TrainConfig()) -> dict:
    """S-disc and d_H of each source against T, and the target 0-1 loss of
    each source-trained classifier."""
    d = toy_domains(seed, n_per_class)
    t = d["T"]
    row = {"seed": seed}
    for name in ("S1", "S2"):
        s = d[name]
        cls = default_class(s, t)
        rep = estimate_sdisc(s, t.features, cls, cfg)
        row[f"sdisc_T_{name}"] = rep.value
        row[f"dh_T_{name}"] = estimate_dh(s.features, t.features, cls, cfg).value
        row[f"target_loss_{name}"] = empirical_risk(rep.reference_hypothesis, t)
    return row


def toy_points(seed: int, n_per_class: int = 200) -> list:
    rows = []
    for name, data in toy_domains(seed, n_per_class).items():
        for x, y in zip(data.features, data.labels):
            rows.append({"domain": name, "x1": float(x[0]), "x2": float(x[1]), "label": int(y)})
    return rows


# --- convergence ------------------------------------------------------------------

class DigitPool:
    """Finite pool of digit images (0-255 pixels) to draw disjoint samples from."""

    def __init__(self, pixels: np.ndarray, digits: np.ndarray):
        self.pixels = np.asarray(pixels, dtype=float)
        self.digits = np.asarray(digits, dtype=np.int64)
        if self.pixels.shape[0] != self.digits.shape[0]:
            raise ValueError("pixels and digits disagree on the item count")

    def draw(self, rng: np.random.Generator, n: int, keep: Optional[Sequence[int]] = None, exclude=None) -> tuple:
        """``n`` rows without replacement, optionally restricted to digits in
        ``keep`` and avoiding row indices in ``exclude``. Returns (dataset, indices)."""
        ok = np.ones(self.digits.size, dtype=bool)
        if keep is not None:
            ok &= np.isin(self.digits, list(keep))
        if exclude is not None:
            ok[np.asarray(exclude, dtype=np.int64)] = False
        avail = np.flatnonzero(ok)
        if n > avail.size:
            raise ValueError(f"requested {n} examples but only {avail.size} are available")
        idx = np.sort(rng.choice(avail, size=n, replace=False))
        x = scale_pixels(self.pixels[idx])
        return LabeledDataset(x, even_odd_labels(self.digits[idx])), idx


def synthetic_pool(size: int, seed: int, style: DigitStyle = DigitStyle()) -> DigitPool:
    x, d = synthetic_digits(size, make_rng(seed, 1, 0), style)
    return DigitPool(x, d)


def run_convergence(n_grid: Sequence[int], seed: int, pool: Optional[DigitPool] = None, cfg: TrainConfig = TrainConfig(), biased_digits=range(8)) -> list:
    """Rows ``(n, pairing, measure, value)``.

    For each ``n`` a labeled source of ``n`` images is compared with an
    independent sample of ``n`` from the same pool ("identical") and with
    ``n`` images restricted to ``biased_digits`` ("biased"). The three
    samples are disjoint. Without a pool, a synthetic one just large enough
    for the largest ``n`` is generated.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid or n_grid[0] < 1:
        raise ValueError("n_grid must hold positive sizes")
    if pool is None:
        pool = synthetic_pool(4 * n_grid[-1], seed)
    rows = []
    for n in n_grid:
        rng = make_rng(seed, 1, 1, n)
        src, used = pool.draw(rng, n)
        same, used2 = pool.draw(rng, n, exclude=used)
        biased, _ = pool.draw(rng, n, keep=biased_digits, exclude=np.concatenate([used, used2]))
        for pairing, tgt in (("identical", same), ("biased", biased)):
            cls = default_class(src, tgt)
            rows.append({"n": n, "pairing": pairing, "measure": "sdisc",
                         "value": estimate_sdisc(src, tgt.features, cls, cfg).value})
            rows.append({"n": n, "pairing": pairing, "measure": "dh",
                         "value": estimate_dh(src.features, tgt.features, cls, cfg).value})
    return rows


# --- source selection --------------------------------------------------------------

# Target images have plain backgrounds; source images sit on a random smooth
# gray background, so every source is linearly separable from the target.
# Strokes are faint (amplitude 25 on a 0-255 scale), so noise of sigma 50
# leaves a corrupted source with a near-chance classifier.
SELECTION_TARGET_STYLE = DigitStyle("plain", pixel_noise=2.0, amplitude=25.0)
SELECTION_SOURCE_STYLE = DigitStyle("offset", pixel_noise=2.0, amplitude=25.0, background_lo=30.0, background_hi=90.0)
# faint strokes need large weights, hence the larger initial step
SELECTION_CFG = TrainConfig(max_epochs=1000, eta0=10.0)


def selection_task(seed: int, rep: int, sigma: float, n: int = 2000, n_clean: int = 5, n_noisy: int = 5) -> tuple:
    """Target, sources and clean tags for one repetition.

    Sources are shuffled with a per-repetition permutation so that tied
    values cannot favour clean sources by input order. The underlying images
    and noise draws do not depend on ``sigma``.
    """
    xt, _ = synthetic_digits(n, make_rng(seed, 2, rep, 0), SELECTION_TARGET_STYLE)
    target = UnlabeledDataset(scale_pixels(xt))
    sources, clean = [], []
    for k in range(n_clean + n_noisy):
        xs, ds = synthetic_digits(n, make_rng(seed, 2, rep, 1, k), SELECTION_SOURCE_STYLE)
        noisy = k >= n_clean
        if noisy:
            xs = corrupt_gaussian_noise(xs, sigma, make_rng(seed, 2, rep, 2, k))
        sources.append(LabeledDataset(scale_pixels(xs), even_odd_labels(ds)))
        clean.append(not noisy)
    perm = make_rng(seed, 2, rep, 3).permutation(len(sources))
    return target, [sources[i] for i in perm], [clean[i] for i in perm]


def run_source_selection(seed: int, sigmas: Sequence[float] = (30.0, 40.0, 50.0), reps: int = 5, n: int = 2000, measures: Sequence[str] = ("sdisc", "dh"), cfg: TrainConfig = SELECTION_CFG) -> list:
    """One row per (sigma, repetition, measure) with the clean-in-top-5 score."""
    rows = []
    for sigma in sigmas:
        for rep in range(reps):
            target, sources, clean = selection_task(seed, rep, sigma, n)
            for m in measures:
                r = rank_sources(target, sources, m, cfg=cfg, clean=clean)
                rows.append({"sigma": float(sigma), "rep": rep, "measure": m, "score": r.clean_in_top,
                             "order": r.order, "values": r.values, "clean": clean})
    return rows


# --- timing ---------------------------------------------------------------------

BENCH_NOTE = "xdisc timed by brute-force pair enumeration over a capped grid, not an SDP solve"


BENCH_GRID_CAP = 8000


def _bench_grid(s: LabeledDataset, t: LabeledDataset, n: int, directions: int) -> tuple:
    # per-direction thresholds grow with n, so pair count grows like n^2
    return direction_threshold_grid(s.features, t.features, directions=direction_net(directions, 2), max_thresholds=n // 2 + 2)


def run_bench(sizes: Sequence[int], repeats: int = 3, seed: int = 0, cfg: TrainConfig = TrainConfig(), directions: int = 16, clock=time.perf_counter) -> list:
    """Median wall-clock seconds of each estimator on the toy pair (T, S1)
    with ``n`` points per domain."""
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    rows = []
    for n in sizes:
        if n < 2:
            raise ValueError("each size must be >= 2")
        d = toy_domains(seed, n // 2)
        s, t = d["S1"], d["T"]
        cls = default_class(s, t)
        grid = _bench_grid(s, t, n, directions)
        gcls = HypothesisClassSpec(grid[0].basis, 1.0, grid)
        jobs = {
            "sdisc": lambda: estimate_sdisc(s, t.features, cls, cfg),
            "dh": lambda: estimate_dh(s.features, t.features, cls, cfg),
            "xdisc_bruteforce": lambda: xdisc_bruteforce(s.features, t.features, gcls, cap=BENCH_GRID_CAP),
        }
        for method, job in jobs.items():
            times = []
            for _ in range(repeats):
                t0 = clock()
                job()
                times.append(clock() - t0)
            rows.append({"n": n, "method": method, "median_seconds": statistics.median(times),
                         "repeats": repeats, "grid_size": len(grid) if method == "xdisc_bruteforce" else "",
                         "note": BENCH_NOTE if method == "xdisc_bruteforce" else ""})
    return rows
