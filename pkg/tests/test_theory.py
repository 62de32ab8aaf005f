import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disckit.disc import direction_net
from disckit.ingest import make_rng
from disckit.theory import (
    BoundReport,
    ComplexityInput,
    dh_deviation_bound,
    population_regret_bound,
    rademacher_linear_product,
    rademacher_product_mc,
    sdisc_deviation_bound,
    sdisc_deviation_bound_general,
    target_regret_bound,
    uniform_deviation_terms,
    xdisc_deviation_bound,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "bounds.json").read_text())


def _inp(**kw):
    base = dict(lam=1.0, d_phi=1.0, n_t=100, n_s=100, delta=0.05)
    base.update(kw)
    return ComplexityInput(**base)


def test_rademacher_linear_product_examples():
    assert rademacher_linear_product(_inp(), 1) == 1.0
    assert rademacher_linear_product(_inp(lam=2.0, d_phi=3.0), 36) == 6.0
    with pytest.raises(ValueError):
        rademacher_linear_product(_inp(), 0)


def test_input_validation():
    with pytest.raises(ValueError):
        _inp(delta=1.0)
    with pytest.raises(ValueError):
        _inp(n_t=0)
    with pytest.raises(ValueError):
        _inp(c_hh=-1.0)
    assert _inp(lam=2.0, d_phi=1.5).complexity == 9.0
    assert _inp(c_hh=0.3).complexity == 0.3


def test_golden_sdisc_deviation():
    g = GOLDEN["sdisc_deviation"]
    assert sdisc_deviation_bound(ComplexityInput(**g["input"])).value == pytest.approx(g["value"], abs=1e-12)


@pytest.mark.parametrize("name,fn", [
    ("sdisc_deviation_general", sdisc_deviation_bound_general),
    ("xdisc_deviation", xdisc_deviation_bound),
    ("dh_deviation", dh_deviation_bound),
])
def test_golden_rademacher_bounds(name, fn):
    g = GOLDEN[name]
    rep = fn(ComplexityInput(**g["input"]), *g["rad"])
    assert rep.value == pytest.approx(g["value"], abs=1e-12)


def test_golden_regret():
    g = GOLDEN["target_regret"]
    r = g["risks"]
    rep = target_regret_bound(r["source_emp_risk"], r["sdisc_emp"], ComplexityInput(**g["input"]), cross_risk=r["cross_risk"])
    assert rep.value == pytest.approx(g["value"], abs=1e-12)
    assert len(rep.terms) == 7 and rep.notes == ()
    g = GOLDEN["population_regret"]
    r = g["risks"]
    assert population_regret_bound(r["source_risk"], r["sdisc"], r["cross_risk"]).value == pytest.approx(g["value"], abs=1e-12)


def test_cross_risk_default_is_annotated():
    rep = target_regret_bound(0.1, 0.2, _inp())
    assert rep.terms["R_T(h_S*, h_T*)"] == 0.0
    assert rep.notes and "cannot be estimated" in rep.notes[0]
    assert population_regret_bound(0.1, 0.2).notes


def test_regret_rejects_out_of_range_risk():
    with pytest.raises(ValueError):
        target_regret_bound(1.5, 0.2, _inp())
    with pytest.raises(ValueError):
        population_regret_bound(0.1, -0.1)


def test_tail_identity_at_special_delta():
    # log(4/delta) = 2 makes M sqrt(log(4/delta)/2n) = sqrt(1/n) for M = 1
    inp = _inp(delta=4 / math.e ** 2, n_t=25, n_s=16)
    rep = sdisc_deviation_bound_general(inp, 0.0, 0.0)
    assert rep.terms["M sqrt(log(4/delta)/(2 n_T))"] == pytest.approx(0.2, abs=1e-15)
    assert rep.terms["M sqrt(log(4/delta)/(2 n_S))"] == pytest.approx(0.25, abs=1e-15)


def test_delta_near_one_leaves_complexity():
    rep = sdisc_deviation_bound(_inp(delta=1 - 1e-15, c_hh=1.0, n_t=4, n_s=4))
    # log(4/delta) tends to log 4, so the tails shrink to sqrt(log 4 / 8) each
    tails = rep.value - rep.terms["C_HH/sqrt(n_T)"] - rep.terms["C_HH/sqrt(n_S)"]
    assert tails == pytest.approx(2 * math.sqrt(math.log(4) / 8), rel=1e-12)


def test_zero_rademacher_symmetric_tails():
    rep = dh_deviation_bound(_inp(n_t=50, n_s=50), 0.0, 0.0)
    assert rep.terms["2 R_T(H)"] == 0.0
    assert rep.terms["sqrt(2 log(4/delta)/n_T)"] == rep.terms["sqrt(2 log(4/delta)/n_S)"]
    with pytest.raises(ValueError):
        dh_deviation_bound(_inp(), -0.1, 0.0)


def test_general_bound_with_unit_loss_equals_xdisc_bound():
    inp = _inp(n_t=123, n_s=456)
    a = sdisc_deviation_bound_general(inp, 0.04, 0.02)
    b = xdisc_deviation_bound(inp, 0.04, 0.02)
    assert a.terms == b.terms and a.value == b.value


def test_uniform_deviation_terms():
    c, t = uniform_deviation_terms(0.1, 2.0, 0.05, 10)
    assert c == 0.2 and t == pytest.approx(2 * math.sqrt(math.log(40) / 20))


def test_regret_dominates_population():
    inp = _inp(n_t=1000, n_s=1000)
    assert target_regret_bound(0.1, 0.2, inp, 0.05).value >= population_regret_bound(0.1, 0.2, 0.05).value


def test_bounds_vanish_in_the_limit():
    big = _inp(n_t=10**14, n_s=10**14)
    assert sdisc_deviation_bound(big).value < 1e-5
    assert target_regret_bound(0.0, 0.0, big, 0.0).value < 1e-5


def test_report_value_is_sum_and_serializes():
    rep = sdisc_deviation_bound(_inp())
    assert rep.value == sum(rep.terms.values())
    out = json.loads(rep.to_json())
    assert out["bound_name"] == "sdisc_deviation"
    assert out["value"] == rep.value
    assert set(out["terms"]) == {"C_HH/sqrt(n_T)", "C_HH/sqrt(n_S)",
                                  "sqrt(log(4/delta)/(2 n_T))", "sqrt(log(4/delta)/(2 n_S))"}
    with pytest.raises(ValueError):
        BoundReport("x", {"a": -1.0})
    with pytest.raises(ValueError):
        BoundReport("x", {"a": math.inf})


sizes = st.integers(1, 10**6)


@settings(max_examples=100, deadline=None)
@given(nt=sizes, ns=sizes, dt=st.integers(1, 1000), ds=st.integers(1, 1000),
       delta=st.floats(0.001, 0.5), shrink=st.floats(0.1, 0.99))
def test_bounds_monotone(nt, ns, dt, ds, delta, shrink):
    calls = [
        lambda i: sdisc_deviation_bound(i),
        lambda i: sdisc_deviation_bound_general(i, 0.01, 0.01),
        lambda i: xdisc_deviation_bound(i, 0.01, 0.01),
        lambda i: dh_deviation_bound(i, 0.01, 0.01),
        lambda i: target_regret_bound(0.1, 0.1, i, 0.1),
    ]
    base = _inp(n_t=nt, n_s=ns, delta=delta)
    more = _inp(n_t=nt + dt, n_s=ns + ds, delta=delta)
    tighter = _inp(n_t=nt, n_s=ns, delta=delta * shrink)
    for f in calls:
        v = f(base).value
        assert f(more).value <= v
        assert f(tighter).value >= v


def test_rademacher_mc_exact_vs_net_and_reproducible():
    rng = make_rng(0, 3)
    x = rng.normal(size=(20, 2))
    x /= np.maximum(1.0, np.linalg.norm(x, axis=1, keepdims=True))
    exact, se = rademacher_product_mc(x, 1.0, 200, make_rng(1))
    net, _ = rademacher_product_mc(x, 1.0, 200, make_rng(1), directions=direction_net(90, 2))
    assert net <= exact + 1e-12 and se > 0
    assert rademacher_product_mc(x, 2.0, 200, make_rng(1))[0] == pytest.approx(4 * exact)
    assert exact == rademacher_product_mc(x, 1.0, 200, make_rng(1))[0]
