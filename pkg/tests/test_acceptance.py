"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers
(visible even under output capture) and then asserts the same condition.
Runtime limits are part of the conditions where a limit is stated.
"""
import json
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from disckit.core import BasisSpec, HypothesisClassSpec, LabeledDataset
from disckit.disc import (
    build_xdisc_sdp,
    default_class,
    direction_net,
    fixed_ref_disc_sweep,
    sdisc_bruteforce,
    threshold_grid_1d,
    xdisc_bruteforce,
)
from disckit.experiments import run_bench, run_source_selection, run_toy
from disckit.ingest import TOY_MEANS, GaussianDomainSpec, gen_gaussian_domain, make_rng
from disckit.learner import WeightedSample, train
from disckit.theory import (
    ComplexityInput,
    dh_deviation_bound,
    population_regret_bound,
    rademacher_linear_product,
    rademacher_product_mc,
    sdisc_deviation_bound,
    sdisc_deviation_bound_general,
    target_regret_bound,
    xdisc_deviation_bound,
)

GOLDEN = Path(__file__).parent / "golden"


def _report(capsys, k, title, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {k} ({title}): {detail}")
    assert ok, detail


def _col(v):
    return np.asarray(v, dtype=float).reshape(-1, 1)


def _grid_cls(grid):
    return HypothesisClassSpec(grid[0].basis, 10.0, tuple(grid))


def _tie_free_instance(seed, ns, nt):
    """Distinct integers + 1/4: no point sits on a grid threshold."""
    rng = make_rng(seed, 20)
    pool = rng.permutation(np.arange(-60, 60))[: ns + nt] + 0.25
    xs, xt = pool[:ns], pool[ns:]
    ys = np.where(xs + rng.normal(scale=5.0, size=ns) >= 0, 1, -1)
    ys[np.argmax(xs)], ys[np.argmin(xs)] = 1, -1
    return LabeledDataset(_col(xs), ys), _col(xt)


def test_criterion_1_sup_form_equals_min_form(capsys):
    t0 = time.perf_counter()
    hits = 0
    for seed in range(20):
        rng = make_rng(seed, 21)
        src, xt = _tie_free_instance(seed, int(rng.integers(5, 51)), int(rng.integers(5, 51)))
        cls = _grid_cls(threshold_grid_1d(src.features, xt))
        rep = sdisc_bruteforce(src, xt, cls)
        h = rep.reference_hypothesis
        tie_free = np.all(h.score(src.features) != 0) and np.all(h.score(xt) != 0)
        hits += bool(tie_free and rep.value == rep.diagnostics["sdisc_from_J"])
    dt = time.perf_counter() - t0
    _report(capsys, 1, "sup form = 1 - min J", hits == 20 and dt < 1.0,
            f"{hits}/20 bit-exact, {dt:.2f}s (limit 1s)")


def test_criterion_2_toy(capsys):
    t0 = time.perf_counter()
    rows = [run_toy(seed) for seed in range(10)]
    dt = time.perf_counter() - t0
    med = {k: statistics.median(r[k] for r in rows) for k in rows[0] if k != "seed"}
    s_order = sum(r["sdisc_T_S1"] < r["sdisc_T_S2"] for r in rows)
    d_order = sum(r["dh_T_S1"] > r["dh_T_S2"] for r in rows)
    targets = {"sdisc_T_S1": 0.27, "sdisc_T_S2": 0.49, "dh_T_S1": 0.69, "dh_T_S2": 0.49}
    bands = all(abs(med[k] - v) <= 0.08 for k, v in targets.items())
    losses = med["target_loss_S1"] <= 0.02 and abs(med["target_loss_S2"] - 0.49) <= 0.10
    ok = s_order >= 9 and d_order >= 9 and bands and losses and dt < 30
    detail = (f"orderings sdisc {s_order}/10, dh {d_order}/10; medians "
              + ", ".join(f"{k}={med[k]:.3f}" for k in (*targets, "target_loss_S1", "target_loss_S2"))
              + f"; {dt:.1f}s (limit 30s)")
    _report(capsys, 2, "toy experiment", ok, detail)


def test_criterion_3_dominance(capsys):
    t0 = time.perf_counter()
    held = 0
    for seed in range(100):
        rng = make_rng(seed, 30)
        ns, nt = int(rng.integers(3, 16)), int(rng.integers(1, 16))
        xs = rng.normal(size=ns)
        ys = np.where(xs + 0.5 * rng.normal(size=ns) >= 0, 1, -1)
        xt = rng.normal(loc=rng.uniform(-2, 2), size=nt)
        src = LabeledDataset(_col(xs), ys)
        cls = _grid_cls(threshold_grid_1d(src.features, _col(xt)))
        s = sdisc_bruteforce(src, _col(xt), cls).value
        held += s <= xdisc_bruteforce(src.features, _col(xt), cls).value
    # constructed: same labeling pattern, different spread
    src = LabeledDataset(_col([-1.0, 1.0]), [-1, 1])
    xt = _col([-2.0, 2.0])
    cls = _grid_cls(threshold_grid_1d(src.features, xt))
    s = sdisc_bruteforce(src, xt, cls).value
    x = xdisc_bruteforce(src.features, xt, cls).value
    dt = time.perf_counter() - t0
    _report(capsys, 3, "S-disc <= X-disc", held == 100 and s < x and dt < 10,
            f"{held}/100 dominated; constructed instance sdisc={s} < xdisc={x}; {dt:.2f}s (limit 10s)")


def _self_disc(seed, n, dirs):
    pos, neg = TOY_MEANS["T"]
    s = gen_gaussian_domain(GaussianDomainSpec(pos, neg, n // 2), make_rng(seed, 5, n, 0))
    t = gen_gaussian_domain(GaussianDomainSpec(pos, neg, n // 2), make_rng(seed, 5, n, 1))
    h = train(WeightedSample.uniform(s.features, s.labels), default_class(s, t))
    return fixed_ref_disc_sweep(h, t.features, s.features, dirs)[0]


def test_criterion_4_convergence_rate(capsys):
    t0 = time.perf_counter()
    dirs = direction_net(360, 2)
    ns = [250, 1000, 4000]
    med = [statistics.median(_self_disc(seed, n, dirs) for seed in range(30)) for n in ns]
    ratios = [med[0] / med[1], med[1] / med[2]]
    slope = float(np.polyfit(np.log(ns), np.log(med), 1)[0])
    dt = time.perf_counter() - t0
    ok = min(ratios) >= 1.6 and -0.7 <= slope <= -0.3 and dt < 120
    _report(capsys, 4, "self-discrepancy rate", ok,
            f"medians {[round(m, 4) for m in med]}, step ratios {ratios[0]:.2f}/{ratios[1]:.2f} (>= 1.6), "
            f"slope {slope:.3f} in [-0.7, -0.3]; {dt:.1f}s (limit 120s)")


def test_criterion_5_bound_coverage(capsys):
    t0 = time.perf_counter()
    dirs = direction_net(360, 2)
    # 0-1 predictions are scale-free, so the class is normalized to lam = d_phi = 1
    bound = sdisc_deviation_bound(ComplexityInput(1.0, 1.0, 500, 500, 0.05)).value
    vals = np.array([_self_disc(seed, 500, dirs) for seed in range(1000, 1200)])
    cover = float(np.mean(vals <= bound))
    dt = time.perf_counter() - t0
    _report(capsys, 5, "deviation bound covers", cover >= 0.95 and dt < 180,
            f"coverage {cover:.3f} of 200 (bound {bound:.4f}, max deviation {vals.max():.4f}); {dt:.1f}s (limit 180s)")


def test_criterion_6_source_selection(capsys):
    t0 = time.perf_counter()
    rows = run_source_selection(seed=0, sigmas=(50.0,), reps=15)
    dt = time.perf_counter() - t0
    s = [r["score"] for r in rows if r["measure"] == "sdisc"]
    d = [r["score"] for r in rows if r["measure"] == "dh"]
    perfect = sum(v == 5 for v in s)
    dh_med = statistics.median(d)
    _report(capsys, 6, "source selection", perfect >= 13 and dh_med <= 4 and dt < 120,
            f"sdisc 5/5 in {perfect}/15 reps (scores {s}); dh median {dh_med} (scores {d}); {dt:.1f}s (limit 120s)")


def test_criterion_7_rademacher_mc(capsys):
    t0 = time.perf_counter()
    inp = ComplexityInput(1.0, 1.0, 50, 50, 0.05)
    bound = rademacher_linear_product(inp, 50)
    dirs = direction_net(720, 2)
    held, worst = 0, 0.0
    for rep in range(10):
        rng = make_rng(rep, 7)
        x = rng.normal(size=(50, 2))
        x /= np.maximum(1.0, np.linalg.norm(x, axis=1, keepdims=True))  # ||phi|| <= d_phi = 1
        mean, se = rademacher_product_mc(x, 1.0, 2000, rng, directions=dirs, chunk=16)
        held += mean <= bound + 3 * se
        worst = max(worst, mean)
    dt = time.perf_counter() - t0
    _report(capsys, 7, "Rademacher Monte Carlo", held == 10 and dt < 60,
            f"{held}/10 below bound {bound:.4f} + 3 SE (largest estimate {worst:.4f}); {dt:.1f}s (limit 60s)")


def test_criterion_8_sdp(capsys):
    t0 = time.perf_counter()
    sdp = build_xdisc_sdp(_col([3.0]), _col([2.0]), BasisSpec("identity", 1, 5.0))
    phi1 = np.zeros((4, 4))
    phi1[2, 3] = phi1[3, 2] = 2.0
    hand = (sdp.a.tolist() == [1.0, -1.0] and sdp.c.tolist() == [1.0, -1.0, 0.0, 0.0]
            and sdp.f.tolist() == [[1, 0, 0, 0], [0, 1, 0, 0]] and np.array_equal(sdp.phi_mats[0], phi1))
    good = 0
    for seed in range(20):
        rng = make_rng(seed, 8)
        nt, ns, d = (int(v) for v in rng.integers(1, 6, size=3))
        xs, xt = rng.normal(size=(ns, d)), rng.normal(size=(nt, d))
        basis = BasisSpec.fit("affine", xs, xt)
        p = basis.output_dim
        s = build_xdisc_sdp(xs, xt, basis)
        N = nt + ns
        ok = (np.all(s.a[:nt] == 1 / nt) and np.all(s.a[nt:] == -1 / ns)
              and np.array_equal(s.c, np.concatenate([s.a, np.zeros(2 * p)]))
              and np.array_equal(s.f, np.eye(N, N + 2 * p)))
        for i, m in enumerate(s.phi_mats):
            phi = basis.transform(np.vstack([xt, xs]))[i]
            ok = ok and np.array_equal(m, m.T) and np.trace(m) == 0
            ok = ok and not m[:N].any() and not m[:, :N].any()
            ok = ok and np.array_equal(m[N:N + p, N + p:], 0.5 * np.outer(phi, phi))
            ok = ok and not m[N:N + p, N:N + p].any() and not m[N + p:, N + p:].any()
        good += bool(ok)
    dt = time.perf_counter() - t0
    _report(capsys, 8, "SDP construction", hand and good == 20 and dt < 1.0,
            f"hand example {'matches' if hand else 'differs'}; invariants {good}/20; {dt:.3f}s (limit 1s)")


def test_criterion_9_golden_bounds(capsys):
    t0 = time.perf_counter()
    g = json.loads((GOLDEN / "bounds.json").read_text())
    got = {
        "sdisc_deviation": sdisc_deviation_bound(ComplexityInput(**g["sdisc_deviation"]["input"])).value,
        "sdisc_deviation_general": sdisc_deviation_bound_general(
            ComplexityInput(**g["sdisc_deviation_general"]["input"]), *g["sdisc_deviation_general"]["rad"]).value,
        "xdisc_deviation": xdisc_deviation_bound(
            ComplexityInput(**g["xdisc_deviation"]["input"]), *g["xdisc_deviation"]["rad"]).value,
        "dh_deviation": dh_deviation_bound(ComplexityInput(**g["dh_deviation"]["input"]), *g["dh_deviation"]["rad"]).value,
        "target_regret": target_regret_bound(
            g["target_regret"]["risks"]["source_emp_risk"], g["target_regret"]["risks"]["sdisc_emp"],
            ComplexityInput(**g["target_regret"]["input"]), g["target_regret"]["risks"]["cross_risk"]).value,
        "population_regret": population_regret_bound(**g["population_regret"]["risks"]).value,
    }
    errs = {k: abs(v - g[k]["value"]) for k, v in got.items()}
    dt = time.perf_counter() - t0
    _report(capsys, 9, "golden bound arithmetic", max(errs.values()) <= 1e-12 and dt < 1.0,
            f"{sum(e <= 1e-12 for e in errs.values())}/{len(errs)} within 1e-12 (max error {max(errs.values()):.1e}); {dt:.3f}s (limit 1s)")


def test_criterion_10_bench(capsys):
    rows = run_bench([100, 200, 400], repeats=3)
    t = {(r["n"], r["method"]): r["median_seconds"] for r in rows}
    ratio = t[(400, "xdisc_bruteforce")] / t[(400, "sdisc")]
    complete = len(rows) == 9
    _report(capsys, 10, "benchmark separation", complete and ratio >= 5,
            f"n=400 medians xdisc {t[(400, 'xdisc_bruteforce')]:.3f}s vs sdisc {t[(400, 'sdisc')]:.3f}s, ratio {ratio:.1f} (>= 5)")
