"""Closed-form deviation and generalization bounds, plus a Monte Carlo
Rademacher estimate for the product class ``H (x) H``.

Every calculator returns a :class:`BoundReport` whose ``value`` is the sum
of its named terms. Term names spell out the formula they hold, with
``C_HH`` for the product-class complexity constant, ``R_T``/``R_S`` for
Rademacher complexities and ``M`` for the loss bound.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "ComplexityInput",
    "BoundReport",
    "rademacher_linear_product",
    "uniform_deviation_terms",
    "sdisc_deviation_bound",
    "sdisc_deviation_bound_general",
    "dh_deviation_bound",
    "xdisc_deviation_bound",
    "target_regret_bound",
    "population_regret_bound",
    "rademacher_product_mc",
]


@dataclass(frozen=True)
class ComplexityInput:
    """Inputs shared by the bound calculators.

    ``c_hh`` defaults to ``lam**2 * d_phi**2``, the constant of the
    linear-in-parameter class.
    """

    lam: float
    d_phi: float
    n_t: int
    n_s: int
    delta: float
    c_hh: Optional[float] = None
    loss_bound: float = 1.0

    def __post_init__(self):
        for name in ("lam", "d_phi", "n_t", "n_s", "loss_bound"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.c_hh is not None and not self.c_hh > 0:
            raise ValueError("c_hh must be positive")

    @property
    def complexity(self) -> float:
        if self.c_hh is not None:
            return float(self.c_hh)
        return float(self.lam) ** 2 * float(self.d_phi) ** 2


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    terms: dict
    notes: tuple = ()
    value: float = field(init=False)

    def __post_init__(self):
        terms = {str(k): float(v) for k, v in self.terms.items()}
        for k, v in terms.items():
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"term {k!r} must be finite and nonnegative, got {v}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "notes", tuple(self.notes))
        object.__setattr__(self, "value", sum(terms.values()))

    def to_dict(self) -> dict:
        out = {"bound_name": self.bound_name, "value": self.value, "terms": dict(self.terms)}
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self, **kw) -> str:
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)


def rademacher_linear_product(inp: ComplexityInput, m: int) -> float:
    """Upper bound ``lam^2 d_phi^2 / sqrt(m)`` on the Rademacher complexity of ``H (x) H``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return float(inp.lam) ** 2 * float(inp.d_phi) ** 2 / math.sqrt(m)


def uniform_deviation_terms(rad: float, bound: float, delta: float, k: int) -> tuple:
    """``(2 rad, B sqrt(log(2/delta) / 2k))``: two-sided uniform deviation of a
    ``[0, B]``-valued class at confidence ``1 - delta``.

    The deviation calculators below call this with ``delta / 2`` per domain.
    """
    if rad < 0:
        raise ValueError("Rademacher complexity must be nonnegative")
    return 2.0 * rad, bound * math.sqrt(math.log(2.0 / delta) / (2.0 * k))


def _two_domain(name: str, inp: ComplexityInput, rad_t: float, rad_s: float, bound: float, labels: tuple, notes=()) -> BoundReport:
    half = inp.delta / 2.0
    ct, tt = uniform_deviation_terms(rad_t, bound, half, inp.n_t)
    cs, ts = uniform_deviation_terms(rad_s, bound, half, inp.n_s)
    return BoundReport(name, dict(zip(labels, (ct, cs, tt, ts))), notes)


def sdisc_deviation_bound(inp: ComplexityInput) -> BoundReport:
    """Deviation of the empirical 0-1 S-disc, under ``R(H (x) H) <= C_HH / sqrt(n)``.

    The 0-1 loss halves the product-class complexity, so each complexity
    term is ``2 * (C_HH / 2) / sqrt(n) = C_HH / sqrt(n)``.
    """
    c = inp.complexity
    return _two_domain(
        "sdisc_deviation",
        inp,
        0.5 * c / math.sqrt(inp.n_t),
        0.5 * c / math.sqrt(inp.n_s),
        1.0,
        ("C_HH/sqrt(n_T)", "C_HH/sqrt(n_S)", "sqrt(log(4/delta)/(2 n_T))", "sqrt(log(4/delta)/(2 n_S))"),
    )


_LOSS_PRODUCT_LABELS = (
    "2 R_T(l o (H x H))",
    "2 R_S(l o (H x H))",
    "M sqrt(log(4/delta)/(2 n_T))",
    "M sqrt(log(4/delta)/(2 n_S))",
)


def sdisc_deviation_bound_general(inp: ComplexityInput, rad_t: float, rad_s: float) -> BoundReport:
    """Deviation of the empirical S-disc for a loss bounded by ``M``.

    ``rad_t`` and ``rad_s`` are the Rademacher complexities of
    ``l o (H (x) H)`` at sample sizes ``n_T`` and ``n_S``.
    """
    return _two_domain("sdisc_deviation_general", inp, rad_t, rad_s, inp.loss_bound, _LOSS_PRODUCT_LABELS)


def xdisc_deviation_bound(inp: ComplexityInput, rad_t: float, rad_s: float) -> BoundReport:
    """Deviation of the empirical X-disc; same form as the general S-disc bound."""
    return _two_domain("xdisc_deviation", inp, rad_t, rad_s, inp.loss_bound, _LOSS_PRODUCT_LABELS)


def dh_deviation_bound(inp: ComplexityInput, rad_t: float, rad_s: float) -> BoundReport:
    """Deviation of the empirical d_H; ``rad_*`` are complexities of ``H`` itself.

    The tails are ``sqrt(2 log(4/delta) / n)``, written out directly.
    """
    if rad_t < 0 or rad_s < 0:
        raise ValueError("Rademacher complexity must be nonnegative")
    log4 = math.log(4.0 / inp.delta)
    return BoundReport("dh_deviation", {
        "2 R_T(H)": 2.0 * rad_t,
        "2 R_S(H)": 2.0 * rad_s,
        "sqrt(2 log(4/delta)/n_T)": math.sqrt(2.0 * log4 / inp.n_t),
        "sqrt(2 log(4/delta)/n_S)": math.sqrt(2.0 * log4 / inp.n_s),
    })


def _check_risk(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


_CROSS_NOTE = (
    "R_T(h_S*, h_T*) needs target labels and cannot be estimated here; "
    "it was set to 0, so the bound is optimistic by that amount"
)


def target_regret_bound(source_emp_risk: float, sdisc_emp: float, inp: ComplexityInput, cross_risk: Optional[float] = None) -> BoundReport:
    """Finite-sample bound on the target regret ``R_T(h, f_T) - R_T(h_T*, f_T)`` under 0-1 loss.

    ``source_emp_risk`` is the empirical source risk of ``h`` against
    ``h_S*`` and ``sdisc_emp`` the empirical S-disc. ``cross_risk`` is the
    target disagreement of ``h_S*`` and ``h_T*``; it is unobservable
    without target labels and defaults to 0 with a note in the report.
    """
    notes = ()
    if cross_risk is None:
        cross_risk, notes = 0.0, (_CROSS_NOTE,)
    c = inp.complexity
    log5 = math.log(5.0 / inp.delta)
    return BoundReport("target_regret", {
        "R_S_hat(h, h_S*)": _check_risk("source_emp_risk", source_emp_risk),
        "R_T(h_S*, h_T*)": _check_risk("cross_risk", cross_risk),
        "sdisc_hat(P_T, P_S)": _check_risk("sdisc_emp", sdisc_emp),
        "C_HH/sqrt(n_T)": c / math.sqrt(inp.n_t),
        "C_HH/sqrt(n_S)": c / math.sqrt(inp.n_s),
        "sqrt(log(5/delta)/(2 n_T))": math.sqrt(log5 / (2.0 * inp.n_t)),
        "2 sqrt(log(5/delta)/(2 n_S))": 2.0 * math.sqrt(log5 / (2.0 * inp.n_s)),
    }, notes)


def population_regret_bound(source_risk: float, sdisc: float, cross_risk: Optional[float] = None) -> BoundReport:
    """Population version: ``R_S(h, h_S*) + R_T(h_S*, h_T*) + sdisc(P_T, P_S)``."""
    notes = ()
    if cross_risk is None:
        cross_risk, notes = 0.0, (_CROSS_NOTE,)
    return BoundReport("population_regret", {
        "R_S(h, h_S*)": _check_risk("source_risk", source_risk),
        "R_T(h_S*, h_T*)": _check_risk("cross_risk", cross_risk),
        "sdisc(P_T, P_S)": _check_risk("sdisc", sdisc),
    }, notes)


def rademacher_product_mc(phi, lam: float, draws: int, rng: np.random.Generator, directions: Optional[np.ndarray] = None, chunk: int = 8) -> tuple:
    """Monte Carlo empirical Rademacher average of ``H (x) H`` on the rows of ``phi``.

    For a draw ``sigma`` the supremum of ``(1/m) sum_i sigma_i h(x_i) h'(x_i)``
    over ``||w||, ||w'|| <= lam`` is ``lam^2 ||A||_2`` with
    ``A = (1/m) sum_i sigma_i phi_i phi_i^T``. With ``directions`` (unit rows)
    the supremum is taken over that net instead, which can only be smaller.
    Returns ``(mean, standard error)`` over the draws.
    """
    phi = np.asarray(phi, dtype=float)
    m = phi.shape[0]
    sigma = rng.choice(np.array([-1.0, 1.0]), size=(draws, m))
    vals = np.empty(draws)
    for lo in range(0, draws, chunk):
        s = sigma[lo:lo + chunk]
        a = np.einsum("dm,mi,mj->dij", s, phi, phi) / m
        if directions is None:
            vals[lo:lo + chunk] = np.abs(np.linalg.eigvalsh(a)).max(axis=1)
        else:
            u = np.asarray(directions, dtype=float)
            vals[lo:lo + chunk] = ((u @ a) @ u.T).reshape(len(s), -1).max(axis=1)
    vals *= float(lam) ** 2
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(draws))
