"""Normalised rational-map families parametrising the Bers-slice correspondences.

Family A: n = 1, p = 2q.  Family B: n = 1, p = 2q + 1.  Family C: n >= 3.
Each builder accepts any parameter values; membership in the actual slice is
not decided here, only the structural audit in :func:`validate_family`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .group import teich_dimension
from .rational import RationalMap, poly_roots, trim
from .sphere import INF, is_inf

PAIR_TOL = 1e-7


@dataclass(frozen=True)
class FamilyAParams:
    q: int
    free: tuple = ()

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("family A needs q >= 2")
        if len(self.free) != self.q - 2:
            raise ValueError(f"family A with q={self.q} takes {self.q - 2} free parameters")

    def coefficients(self) -> dict:
        """a_1 .. a_{2q-1} (index -> value)."""
        q = self.q
        a = {j: 0j for j in range(1, 2 * q)}
        for j, v in enumerate(self.free, start=1):
            a[j] = complex(v)
        for j in range(2, q):
            a[2 * q - j - 1] = -(j - 1) / (2 * q - j - 1) * a[j - 1]
        a[2 * q - 1] = 1.0 / (2 * q - 1)
        return a


@dataclass(frozen=True)
class FamilyBParams:
    q: int
    free: tuple = ()

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("family B needs q >= 2")
        if len(self.free) != self.q - 1:
            raise ValueError(f"family B with q={self.q} takes {self.q - 1} free parameters")

    def coefficients(self) -> dict:
        """a_1 .. a_{2q}."""
        q = self.q
        a = {j: 0j for j in range(1, 2 * q + 1)}
        for j, v in enumerate(self.free, start=1):
            a[j] = complex(v)
        for j in range(2, q + 1):
            a[2 * q - j] = -(j - 1) / (2 * q - j) * a[j - 1]
        a[2 * q] = 1.0 / (2 * q)
        return a


def _symmetric_set(n_values: int, pairs) -> list[complex]:
    out = [1 + 0j]
    if n_values % 2 == 0:
        out.append(-1 + 0j)
    for c in pairs:
        c = complex(c)
        out += [c, 1 / c]
    return out


@dataclass(frozen=True)
class FamilyCParams:
    n: int
    p: int
    critical_data: tuple = field(default=())

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("family C needs n >= 3")
        if self.p < 1:
            raise ValueError("family C needs p >= 1")
        data = self.critical_data
        if not data:
            # base point: the p-th roots of unity
            data = tuple(np.exp(2j * np.pi * np.arange(self.p) / self.p))
        object.__setattr__(self, "critical_data", tuple(complex(c) for c in data))
        check_critical_data(self.critical_data, self.p)

    @classmethod
    def from_pairs(cls, n: int, p: int, pairs) -> "FamilyCParams":
        return cls(n, p, tuple(_symmetric_set(p, pairs)))

    @property
    def free_count(self) -> int:
        return (self.p - 1) // 2


def check_critical_data(data, p: int) -> None:
    data = [complex(c) for c in data]
    if len(data) != p:
        raise ValueError(f"need exactly p={p} critical values, got {len(data)}")
    if any(abs(c) < 1e-12 for c in data):
        raise ValueError("critical data may not contain 0")
    if not any(abs(c - 1) < PAIR_TOL for c in data):
        raise ValueError("critical data must contain 1")
    if p % 2 == 0 and not any(abs(c + 1) < PAIR_TOL for c in data):
        raise ValueError("critical data must contain -1 for even p")
    if not _inversion_closed(data):
        raise ValueError("critical data must be closed under z -> 1/z")


def _inversion_closed(pts, tol: float = PAIR_TOL) -> bool:
    pts = list(pts)
    left = list(pts)
    for c in pts:
        target = 1 / c
        dist = [abs(target - x) for x in left]
        if not dist or min(dist) > tol * max(1.0, abs(target)):
            return False
        left.pop(int(np.argmin(dist)))
    return True


def _laurent_map(a: dict) -> RationalMap:
    terms = {1: 1.0}
    terms.update({-j: v for j, v in a.items()})
    return RationalMap.laurent(terms)


def build_family_a(params: FamilyAParams) -> RationalMap:
    return _laurent_map(params.coefficients())


def build_family_b(params: FamilyBParams) -> RationalMap:
    return _laurent_map(params.coefficients())


def family_c_zeros(n: int, p: int, critical_data) -> np.ndarray:
    """The zeros a_1..a_p determined by the critical polynomial's roots."""
    Q = P.polyfromroots(np.asarray(critical_data, dtype=complex))  # ascending, monic
    # Q = z^p + sum_j q_j z^{p-j}, q_j = (-1)^j e_j (1 - n j)
    e = [(-1) ** j * Q[p - j] / (1 - n * j) for j in range(1, p + 1)]
    E = np.zeros(p + 1, dtype=complex)
    E[p] = 1
    for j, ej in enumerate(e, start=1):
        E[p - j] = (-1) ** j * ej
    zeros = P.polyroots(E) if p > 1 else np.array([-E[0]])
    if p > 1:
        gaps = np.abs(zeros[:, None] - zeros[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < 1e-8:
            raise ValueError("degenerate parameters: zeros of R collide")
    return zeros


def build_family_c(n: int, p: int, critical_data=None) -> RationalMap:
    params = FamilyCParams(n, p, tuple(critical_data) if critical_data is not None else ())
    zeros = family_c_zeros(n, p, params.critical_data)
    E = P.polyfromroots(zeros)
    num = P.polypow(E, n)
    den = np.zeros(n * p, dtype=complex)
    den[-1] = 1
    return RationalMap(num, den)


def critical_polynomial(R: RationalMap, n: int, p: int) -> np.ndarray:
    """Monic degree-p polynomial whose roots are the boundary critical points.

    Obtained from the Wronskian after removing the pole factor z^(np-2) and,
    for n >= 2, the factor E^(n-1) carried by the n-fold zeros.
    """
    W = R.wronskian()
    k = 0
    while k < len(W) and W[k] == 0:
        k += 1
    W = W[k:]
    if n >= 2:
        zs = [z for z, m in poly_roots(R.num) for _ in range(max(1, m // n))]
        E = P.polyfromroots(zs)
        W, rem = P.polydiv(W, P.polypow(E, n - 1))
        if np.abs(rem).max(initial=0) > 1e-8 * np.abs(W).max():
            raise ArithmeticError("zeros of R do not carry the expected multiplicity")
    W = trim(W)
    return W / W[-1]


def inversion_residual(Q) -> float:
    """min over signs of max |reversed(Q) - sign * Q|."""
    Q = np.asarray(Q, dtype=complex)
    rev = Q[::-1]
    return float(min(np.abs(rev - Q).max(), np.abs(rev + Q).max()))


@dataclass
class FamilyAudit:
    ok: bool
    failures: list
    boundary_points: list
    eta_fixed: list
    pole_multiplicity: int
    pole_order: int
    branch_points: list  # multiplicity n-1 points
    branch_values: list
    value_at_inf: complex
    derivative_at_inf: complex
    q_inversion_residual: float
    q_at_one: float
    q_at_minus_one: float | None

    def to_json(self) -> dict:
        def enc(z):
            return "inf" if is_inf(z) else [z.real, z.imag]

        return {
            "ok": self.ok,
            "failures": self.failures,
            "boundary_points": [enc(z) for z in self.boundary_points],
            "eta_fixed": [enc(z) for z in self.eta_fixed],
            "pole_multiplicity": self.pole_multiplicity,
            "pole_order": self.pole_order,
            "branch_points": [enc(z) for z in self.branch_points],
            "branch_values": [enc(z) for z in self.branch_values],
            "q_inversion_residual": self.q_inversion_residual,
        }


def validate_family(R: RationalMap, n: int, p: int, tol: float = PAIR_TOL) -> FamilyAudit:
    fails = []
    if R.degree != n * p:
        fails.append(f"degree {R.degree} != np = {n * p}")
    crit = R.critical_points()
    pole_mult = sum(m for z, m in crit if not is_inf(z) and abs(z) < 1e-12)
    others = [(z, m) for z, m in crit if is_inf(z) or abs(z) >= 1e-12]
    branch, bvals = [], []
    if n >= 2:
        branch = [z for z, m in others if m == n - 1 and not is_inf(z)]
        bvals = [R(z) for z in branch]
        others = [(z, m) for z, m in others if not (m == n - 1 and not is_inf(z))]
        if len(branch) != p:
            fails.append(f"(iii) found {len(branch)} points of multiplicity n-1, expected {p}")
        elif max(abs(v - bvals[0]) for v in bvals) > 1e-8:
            fails.append("(iii) branch points do not share a critical value")
    boundary = [z for z, m in others for _ in range(m)]
    if len(boundary) != p or len({complex(round(z.real, 6), round(z.imag, 6)) for z in boundary if not is_inf(z)}) != p:
        fails.append(f"(i) expected {p} distinct boundary critical points, got {len(boundary)}")
    elif not _inversion_closed(boundary, tol):
        fails.append("(i) boundary critical points not closed under z -> 1/z")
    fixed = [z for z in boundary if not is_inf(z) and abs(z - 1 / z) < tol]
    if len(fixed) != (2 if p % 2 == 0 else 1):
        fails.append(f"(i) {len(fixed)} eta-fixed critical points")
    order = R.pole_order_at_zero()
    if order != n * p - 1 or pole_mult != n * p - 2:
        fails.append(f"(ii) pole order {order}, critical multiplicity {pole_mult} at 0")
    vinf, dinf = R.value_at_infinity(), R.derivative_at_infinity()
    if not is_inf(vinf) or is_inf(dinf) or abs(dinf - 1) > 1e-12:
        fails.append("(iv) normalisation at infinity")
    Q = critical_polynomial(R, n, p)
    qres = inversion_residual(Q)
    q1 = abs(P.polyval(1.0, Q))
    qm1 = abs(P.polyval(-1.0, Q)) if p % 2 == 0 else None
    if qres > 1e-10 or q1 > 1e-10 or (qm1 is not None and qm1 > 1e-10):
        fails.append("critical polynomial symmetry")
    return FamilyAudit(
        not fails, fails, boundary, fixed, pole_mult, order, branch, bvals, vinf, dinf, qres, q1, qm1
    )


def free_parameter_count(family: str, n: int, p: int) -> int:
    if family == "a":
        return p // 2 - 2
    if family == "b":
        return (p - 1) // 2 - 1
    if family == "c":
        return (p - 1) // 2
    raise ValueError(family)


def family_for(n: int, p: int) -> str:
    if n == 1:
        return "a" if p % 2 == 0 else "b"
    if n >= 3:
        return "c"
    raise ValueError("no normalised family for n = 2")


def build(family: str, n: int, p: int, params=None) -> RationalMap:
    """Uniform entry point used by the CLI; omitted free parameters default to 0."""
    if params is None:
        params = (0,) * free_parameter_count(family, n, p) if family in "ab" else ()
    if family == "a":
        if n != 1 or p % 2:
            raise ValueError("family A needs n=1 and even p")
        return build_family_a(FamilyAParams(p // 2, tuple(params)))
    if family == "b":
        if n != 1 or p % 2 == 0:
            raise ValueError("family B needs n=1 and odd p")
        return build_family_b(FamilyBParams((p - 1) // 2, tuple(params)))
    if family == "c":
        data = FamilyCParams.from_pairs(n, p, params).critical_data if params else None
        return build_family_c(n, p, data)
    raise ValueError(f"unknown family {family!r}")


def dimension_matches(family: str, n: int, p: int) -> bool:
    return free_parameter_count(family, n, p) == teich_dimension(n, p)
