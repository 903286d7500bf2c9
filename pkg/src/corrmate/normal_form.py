"""Normal form for p = 1 correspondences: the polynomial model and the symmetric 2:2 equation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .correspondence import deflate
from .rational import RationalMap, poly_roots, trim
from .sphere import INF, MobiusMap, as_complex, is_inf, mobius_from_points

AUDIT_TOL = 1e-8


class NormalFormError(ValueError):
    pass


@dataclass(frozen=True)
class NormalFormResult:
    M1: MobiusMap
    M2: MobiusMap
    M3: MobiusMap
    R1: RationalMap
    a: complex
    n: int
    final_identity_residual: float

    @property
    def R2(self) -> RationalMap:
        return self.R1.conjugate(MobiusMap.identity(), self.M3.inverse())

    @property
    def eta1(self) -> MobiusMap:
        eta = MobiusMap(0, 1, 1, 0)
        return self.M1 @ eta @ self.M1.inverse()

    @property
    def eta2(self) -> MobiusMap:
        return self.M3 @ self.eta1 @ self.M3.inverse()

    @property
    def chart(self) -> MobiusMap:
        """Original coordinate -> normal-form coordinate."""
        return self.M3 @ self.M1

    def to_json(self) -> dict:
        return {
            "M1": self.M1.to_json(),
            "M2": self.M2.to_json(),
            "M3": self.M3.to_json(),
            "R1": self.R1.to_json(),
            "a": [self.a.real, self.a.imag],
            "n": self.n,
            "final_identity_residual": self.final_identity_residual,
        }


def _locate(crit, n: int):
    """(c1, c2, c3): eta-fixed boundary point, pole cluster, multiplicity n-1 point."""
    c1 = [z for z, m in crit if not is_inf(z) and abs(z - 1) < AUDIT_TOL]
    c2 = [z for z, m in crit if not is_inf(z) and abs(z) < AUDIT_TOL]
    c3 = [z for z, m in crit if not is_inf(z) and m == n - 1 and abs(z) >= AUDIT_TOL and abs(z - 1) >= AUDIT_TOL]
    if len(c1) != 1 or len(c3) != 1 or (n > 2 and len(c2) != 1):
        raise NormalFormError(f"critical-point audit failed: {crit}")
    return 1 + 0j, 0j, c3[0]


def bp_normalize(R: RationalMap, n: int, samples: int = 64, seed: int = 0) -> NormalFormResult:
    if R.degree != n or n < 3:
        raise NormalFormError("expected a p = 1 map of degree n >= 3")
    if R.pole_order_at_zero() != n - 1:
        raise NormalFormError("pole at 0 must have order n - 1")
    c1, c2, c3 = _locate(R.critical_points(), n)
    M1 = mobius_from_points([c1, c2, c3], [1, -1, INF])
    M2 = mobius_from_points([R(c1), R(c2), R(c3)], [-2, 2, INF])
    R1 = R.conjugate(M2, M1.inverse())
    scale = np.abs(R1.num).max()
    if R1.dd != 0 or np.abs(R1.den[1:]).max(initial=0) > 1e-9 * scale:
        raise NormalFormError("transported map is not a polynomial")
    R1 = RationalMap.polynomial(trim(R1.num / R1.den[0], 1e-13))
    a = M1(-1 + 0j)
    M3 = MobiusMap(1, -1, -1, a)
    res = NormalFormResult(M1, M2, M3, R1, a, n, 0.0)
    resid = identity_residual(res, samples, seed)
    return NormalFormResult(M1, M2, M3, R1, a, n, resid)


def _solve_u(res: NormalFormResult, u0: complex) -> list[complex]:
    c = res.R1.num.astype(complex).copy()
    c[0] -= complex(P.polyval(u0, res.R1.num))
    q = deflate(c, u0)
    return [z for z, m in poly_roots(q) for _ in range(m)]


def bp_branches(res: NormalFormResult, X) -> list:
    """Solutions Y != -X of R2(Y) = R2(-X), with multiplicity."""
    X = as_complex(X)
    u0 = res.M3.inverse()(INF if is_inf(X) else -X)
    if is_inf(u0):
        raise NormalFormError("branch base point maps to infinity")
    return [res.M3(u) for u in _solve_u(res, u0)]


def identity_residual(res: NormalFormResult, samples: int = 64, seed: int = 0) -> float:
    """Defect of the displayed correspondence identity over sampled pairs.

    For n = 3 this is |U^2 + UV + V^2 - 3| with U = (aY+1)/(Y+1),
    V = (aX-1)/(X-1); otherwise the relative defect of R1(U) = R1(V).
    Samples stay 0.05 away from the chart poles X = 1, Y = -1.
    """
    rng = np.random.default_rng(seed)
    a = res.a
    worst = 0.0
    count = 0
    while count < samples:
        X = complex(rng.normal(), rng.normal())
        if abs(X - 1) < 0.05:
            continue
        for Y in bp_branches(res, X):
            if is_inf(Y) or abs(Y + 1) < 0.05:
                continue
            U = (a * Y + 1) / (Y + 1)
            V = (a * X - 1) / (X - 1)
            if res.n == 3:
                err = abs(U * U + U * V + V * V - 3)
            else:
                lhs, rhs = P.polyval(U, res.R1.num), P.polyval(V, res.R1.num)
                err = abs(lhs - rhs) / max(1.0, abs(lhs))
            worst = max(worst, float(err))
            count += 1
    return worst
