"""Registry of invariant suites run by ``corrmate verify``.

Adding a suite means adding one row to :data:`SUITES`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bers import build, family_for, validate_family
from .circle import (
    FactorCircleMap, conjugacy_defect, critical_points_fbs, cyclically_monotone, lift_degree, markov_partition,
)
from .correspondence import Correspondence, deck_model, deck_tau, eta_agreement, set_distance
from .group import build_group, orbifold_to_np, quotient_signature, side_pairing_residuals
from .normal_form import bp_normalize


@dataclass
class SuiteResult:
    name: str
    ok: bool
    details: dict

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "details": self.details}


def _group(n, p):
    res = side_pairing_residuals(build_group(n, p))
    return max(res.values()) < 1e-12, res


def _orbifold(n, p):
    sig = quotient_signature(n, p, extended=True)
    if n == 2:
        return True, {"skipped": "order-2 rotation is not a cone point of order >= 3"}
    nu = n if n >= 3 else None
    got = orbifold_to_np(sig.punctures, sig.order2_points, 1 if nu else 0, nu)
    return got == (n, p, n * p - 1), {"signature": [sig.punctures, sig.order2_points, sig.orderN_points], "np_d": got}


def _circle(n, p):
    Fm = FactorCircleMap.from_np(n, p)
    deg, err = lift_degree(Fm)
    crit = critical_points_fbs(Fm)
    crit_ok = (len(crit) == (p if n >= 2 else 0)) and all(
        c.multiplicity == n - 1 and abs(c.value) < 1e-12 and c.local_degree == n for c in crit
    )
    part = markov_partition(Fm)
    thetas = np.arange(512) / 512
    h, defect = conjugacy_defect(Fm, thetas, 40)
    mono = cyclically_monotone(h)
    ok = deg == n * p - 1 and crit_ok and float(defect.max()) < 1e-6 and mono
    return ok, {
        "lift_degree": deg,
        "critical_points": len(crit),
        "markov_pieces": part.pieces,
        "conjugacy_defect": float(defect.max()),
        "monotone": mono,
    }


def _family(n, p):
    fam = family_for(n, p)
    audit = validate_family(build(fam, n, p), n, p)
    return audit.ok, {"family": fam, "failures": audit.failures, "q_residual": audit.q_inversion_residual}


def _branches(n, p):
    C = Correspondence(build(family_for(n, p), n, p))
    rng = np.random.default_rng(0)
    worst_trip, worst_eta = 0.0, 0.0
    for _ in range(20):
        z = complex(*rng.normal(size=2))
        fwd = C.forward(z)
        if len(fwd) != C.d:
            return False, {"bidegree": len(fwd)}
        worst_trip = max(worst_trip, min(abs(x - z) for w in fwd for x in C.backward(w)))
        worst_eta = max(worst_eta, set_distance([1 / x for x in C.backward(1 / z)], fwd))
    frac, _, _ = eta_agreement(C, (-2.5, 2.5, -2.5, 2.5), 64, 64)
    ok = worst_trip < 1e-7 and worst_eta < 1e-8 and frac >= 0.98
    return ok, {"round_trip": worst_trip, "eta_duality": worst_eta, "eta_agreement_64": frac}


def _deck(n, p):
    C = Correspondence(build("c", n, p))
    model = deck_model(C, n, p, trust_radius=0.05)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        z = model.x0 + 0.05 * rng.uniform(0.1, 1) * np.exp(2j * np.pi * rng.uniform())
        w = z
        for _ in range(n * p):
            w = deck_tau(C, w, n, p, model=model)
        worst = max(worst, abs(w - z))
    return worst < 1e-6, {"tau_order_residual": worst}


def _normal(n, p):
    res = bp_normalize(build("c", n, 1), n)
    ok = res.final_identity_residual < 1e-8
    if n == 3:
        ok = ok and np.allclose(res.R1.num, [0, -3, 0, 1], atol=1e-9) and abs(res.a - 5) < 1e-9
    return ok, {"a": [res.a.real, res.a.imag], "residual": res.final_identity_residual}


@dataclass(frozen=True)
class Suite:
    name: str
    applies: Callable[[int, int], bool]
    run: Callable[[int, int], tuple]


SUITES = [
    Suite("group", lambda n, p: True, _group),
    Suite("orbifold", lambda n, p: True, _orbifold),
    Suite("circle", lambda n, p: True, _circle),
    Suite("family", lambda n, p: n != 2, _family),
    Suite("branches", lambda n, p: n != 2, _branches),
    Suite("deck", lambda n, p: n >= 3 and p == 1, _deck),
    Suite("normal_form", lambda n, p: n >= 3 and p == 1, _normal),
]


def run_suites(n: int, p: int, only=None) -> list[SuiteResult]:
    build_group(n, p)  # rejects np < 3 up front
    out = []
    for suite in SUITES:
        if only and suite.name not in only:
            continue
        if not suite.applies(n, p):
            continue
        try:
            ok, details = suite.run(n, p)
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            ok, details = False, {"error": str(exc)}
        out.append(SuiteResult(suite.name, bool(ok), details))
    return out
