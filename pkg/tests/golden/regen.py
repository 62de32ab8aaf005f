"""Recompute the golden values with plain Python (no disckit imports).

Run from this directory: ``python regen.py``. The outputs are frozen
into the JSON files next to this script and compared against the package
by the test-suite.
"""
import json
import math
from fractions import Fraction
from itertools import product


def sgn(z):
    return 1 if z >= 0 else -1


def threshold_grid(ts):
    # (orientation, threshold): h(x) = sgn(o * (x - t))
    return [(o, t) for t in ts for o in (1, -1)]


def risk(h, xs, ref):
    o, t = h
    return Fraction(sum(sgn(o * (x - t)) != r for x, r in zip(xs, ref)), len(xs))


def four_point():
    sx = [-2.0, -1.0, 1.0, 2.0]
    tx = [-2.0, -1.0, -1.0, -2.0]
    href = sgn  # source classifier: sign(x), the trained classifier on this instance
    grid = threshold_grid([-3.0, -1.5, 0.0, 1.5, 3.0])
    rs = [href(x) for x in sx]
    rt = [href(x) for x in tx]
    sdisc = max(abs(risk(h, tx, rt) - risk(h, sx, rs)) for h in grid)
    jmin = min(risk(h, sx, rs) + risk(h, tx, [-r for r in rt]) for h in grid)

    def pair_gap(h, g):
        pt = [sgn(g[0] * (x - g[1])) for x in tx]
        ps = [sgn(g[0] * (x - g[1])) for x in sx]
        return abs(risk(h, tx, pt) - risk(h, sx, ps))

    xdisc = max(pair_gap(h, g) for h, g in product(grid, grid))
    return {
        "source_x": sx,
        "source_y": [1 if x > 0 else -1 for x in sx],
        "target_x": tx,
        "thresholds": [-3.0, -1.5, 0.0, 1.5, 3.0],
        "sdisc": str(sdisc),
        "one_minus_min_J": str(1 - jmin),
        "xdisc_grid": str(xdisc),
    }


def bounds():
    out = {}
    d = 0.05
    n = 800
    c = 1.0
    out["sdisc_deviation"] = {
        "input": {"lam": 1.0, "d_phi": 1.0, "n_t": n, "n_s": n, "delta": d, "c_hh": c},
        "value": c / math.sqrt(n) + c / math.sqrt(n) + 2 * math.sqrt(math.log(4 / d) / (2 * n)),
    }
    nt, ns, m, rt, rs = 300, 700, 2.0, 0.05, 0.03
    tail = lambda k: m * math.sqrt(math.log(4 / d) / (2 * k))
    out["sdisc_deviation_general"] = {
        "input": {"lam": 1.0, "d_phi": 1.0, "n_t": nt, "n_s": ns, "delta": d, "loss_bound": m},
        "rad": [rt, rs],
        "value": 2 * rt + 2 * rs + tail(nt) + tail(ns),
    }
    out["xdisc_deviation"] = dict(out["sdisc_deviation_general"])
    nt, ns, rt, rs = 400, 900, 0.07, 0.02
    out["dh_deviation"] = {
        "input": {"lam": 1.0, "d_phi": 1.0, "n_t": nt, "n_s": ns, "delta": d},
        "rad": [rt, rs],
        "value": 2 * rt + 2 * rs + math.sqrt(2 * math.log(4 / d) / nt) + math.sqrt(2 * math.log(4 / d) / ns),
    }
    n, lam, dphi = 1000, 2.0, 1.5
    cc = lam ** 2 * dphi ** 2
    src, cross, sd = 0.1, 0.05, 0.2
    out["target_regret"] = {
        "input": {"lam": lam, "d_phi": dphi, "n_t": n, "n_s": n, "delta": d},
        "risks": {"source_emp_risk": src, "cross_risk": cross, "sdisc_emp": sd},
        "value": src + cross + sd + cc / math.sqrt(n) + cc / math.sqrt(n)
        + math.sqrt(math.log(5 / d) / (2 * n)) + 2 * math.sqrt(math.log(5 / d) / (2 * n)),
    }
    out["population_regret"] = {
        "risks": {"source_risk": src, "cross_risk": cross, "sdisc": sd},
        "value": src + cross + sd,
    }
    return out


if __name__ == "__main__":
    with open("four_point.json", "w") as f:
        json.dump(four_point(), f, indent=2)
        f.write("\n")
    with open("bounds.json", "w") as f:
        json.dump(bounds(), f, indent=2)
        f.write("\n")
