"""Rational maps of the sphere stored as ascending coefficient vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .sphere import INF, MobiusMap, SpherePoint, as_complex, chordal, is_inf

MULT_TOL = 1e-12  # relative size of vanishing Taylor coefficients at a multiple root
TRIM_TOL = 1e-13  # relative size under which a leading coefficient counts as zero


def trim(c, tol: float = 0.0) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = np.abs(c).max() if c.size else 0.0
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= tol * scale:
        k -= 1
    return c[:k].copy()


def degree(c) -> int:
    return len(trim(c)) - 1


def _taylor(c: np.ndarray, z: complex, k: int) -> complex:
    """k-th Taylor coefficient p^(k)(z)/k!."""
    dk = P.polyder(c, k) if k else c
    return complex(P.polyval(z, dk)) / math.factorial(k)


def _taylor_scale(c: np.ndarray, z: complex, k: int) -> float:
    i = np.arange(k, len(c))
    binom = np.array([math.comb(int(j), k) for j in i], dtype=float)
    return float(np.sum(np.abs(c[k:]) * binom * abs(z) ** (i - k))) + 1e-300


def _polish(c: np.ndarray, z: complex, k: int, steps: int = 8) -> complex:
    """Newton on the k-th derivative (a simple root there for a (k+1)-fold root)."""
    dk = P.polyder(c, k) if k else c
    d1 = P.polyder(dk)
    for _ in range(steps):
        f = complex(P.polyval(z, dk))
        df = complex(P.polyval(z, d1))
        if df == 0:
            break
        step = f / df
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _verified(c: np.ndarray, mu: complex, m: int, tol: float) -> bool:
    return all(abs(_taylor(c, mu, k)) <= tol * _taylor_scale(c, mu, k) for k in range(m - 1))


def _cluster(roots: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage groups with relative radius."""
    k = len(roots)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if abs(roots[i] - roots[j]) <= radius * max(1.0, abs(roots[i]), abs(roots[j])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return [roots[idx] for idx in groups.values()]


def _split(c: np.ndarray, group: np.ndarray, radius: float, tol: float) -> list[tuple[complex, int]]:
    m = len(group)
    if m == 1:
        return [(complex(group[0]), 1)]
    mu = _polish(c, complex(group.mean()), m - 1)
    if abs(mu - group.mean()) > 10 * radius * max(1.0, abs(mu)):
        mu = complex(group.mean())
    if _verified(c, mu, m, tol):
        return [(mu, m)]
    if radius < 1e-12:
        return [(complex(r), 1) for r in group]
    out = []
    for sub in _cluster(group, radius / 10):
        out.extend(_split(c, sub, radius / 10, tol))
    return out


def poly_roots(c, tol: float = MULT_TOL) -> list[tuple[complex, int]]:
    """Roots with multiplicity of the polynomial with ascending coefficients ``c``.

    Companion eigenvalues with a Newton polish, grouped by single linkage at a
    coarse radius.  A group of size m is accepted as an m-fold root only when
    the first m-1 Taylor coefficients vanish at its polished centre; otherwise
    it is split with a tighter radius.
    """
    c = trim(c)
    if len(c) == 1:
        return []
    nz = 0
    while nz < len(c) - 1 and c[nz] == 0:
        nz += 1
    out = [(0j, nz)] if nz else []
    q = c[nz:]
    if len(q) == 1:
        return out
    raw = P.polyroots(q)
    raw = np.array([_polish(q, complex(r), 0, 2) for r in raw])
    for group in _cluster(raw, 1e-1):
        out.extend(_split(q, group, 1e-1, tol))
    return out


def _expand(pairs) -> list[complex]:
    return [z for z, m in pairs for _ in range(m)]


@dataclass(frozen=True)
class Fiber:
    roots: list  # (point, multiplicity), point may be INF
    residual: float
    ill_conditioned: bool = False

    @property
    def points(self) -> list[complex]:
        return _expand(self.roots)

    def __len__(self):
        return sum(m for _, m in self.roots)


@dataclass(frozen=True)
class RationalMap:
    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self):
        num = trim(self.num)
        den = trim(self.den)
        if not np.any(den):
            raise ValueError("zero denominator")
        lead = den[-1]
        object.__setattr__(self, "num", num / lead)
        object.__setattr__(self, "den", den / lead)
        self.num.setflags(write=False)
        self.den.setflags(write=False)

    @classmethod
    def polynomial(cls, coeffs) -> "RationalMap":
        return cls(np.asarray(coeffs, dtype=complex), np.ones(1, dtype=complex))

    @classmethod
    def laurent(cls, coeffs: dict) -> "RationalMap":
        """Map from a finite Laurent series {power: coefficient}."""
        low = min(0, min(coeffs))
        high = max(0, max(coeffs))
        num = np.zeros(high - low + 1, dtype=complex)
        for k, v in coeffs.items():
            num[k - low] += v
        den = np.zeros(-low + 1, dtype=complex)
        den[-1] = 1
        return cls(num, den)

    @property
    def dn(self) -> int:
        return len(self.num) - 1

    @property
    def dd(self) -> int:
        return len(self.den) - 1

    @property
    def degree(self) -> int:
        return max(self.dn, self.dd)

    @property
    def is_polynomial(self) -> bool:
        return self.dd == 0

    def value_at_infinity(self) -> complex:
        if self.dn > self.dd:
            return INF
        if self.dn == self.dd:
            return complex(self.num[-1] / self.den[-1])
        return 0j

    def derivative_at_infinity(self) -> complex:
        """Limit of R'(z) as z tends to infinity."""
        if self.dn == self.dd + 1:
            return complex(self.num[-1] / self.den[-1])
        if self.dn > self.dd + 1:
            return INF
        return 0j

    def __call__(self, z):
        zc = as_complex(z)
        w = self._eval(zc)
        return SpherePoint(w) if isinstance(z, SpherePoint) else w

    def _eval(self, z: complex) -> complex:
        if is_inf(z):
            return self.value_at_infinity()
        if abs(z) > 1e8:
            y = 1.0 / z
            nv = complex(P.polyval(y, self.num[::-1]))
            dv = complex(P.polyval(y, self.den[::-1]))
            if dv == 0:
                return INF
            try:
                return nv / dv * z ** (self.dn - self.dd)
            except OverflowError:
                return INF
        dv = complex(P.polyval(z, self.den))
        if dv == 0:
            return INF
        w = complex(P.polyval(z, self.num)) / dv
        return INF if is_inf(w) else w

    def eval_array(self, z) -> np.ndarray:
        from .kernels import _numpy

        return _numpy.rat_eval(self.num, self.den, z, self.value_at_infinity())

    def wronskian(self) -> np.ndarray:
        return trim(P.polysub(P.polymul(P.polyder(self.num), self.den), P.polymul(self.num, P.polyder(self.den))))

    def derivative(self, z):
        zc = as_complex(z)
        if is_inf(zc):
            out = self.derivative_at_infinity()
        else:
            dv = complex(P.polyval(zc, self.den))
            if dv == 0:
                out = INF
            else:
                out = complex(P.polyval(zc, self.wronskian())) / (dv * dv)
        return SpherePoint(out) if isinstance(z, SpherePoint) else out

    def critical_points(self) -> list[tuple[complex, int]]:
        if self.degree < 2:
            raise ValueError("degree must be at least 2")
        W = self.wronskian()
        pts = poly_roots(W)
        at_inf = 2 * self.degree - 2 - (len(W) - 1)
        if at_inf > 0:
            pts.append((INF, at_inf))
        return pts

    def poles(self) -> list[tuple[complex, int]]:
        pts = poly_roots(self.den) if self.dd > 0 else []
        if self.dn > self.dd:
            pts.append((INF, self.dn - self.dd))
        return pts

    def pole_order_at_zero(self) -> int:
        k = 0
        while k < len(self.den) and self.den[k] == 0:
            k += 1
        j = 0
        while j < len(self.num) and self.num[j] == 0:
            j += 1
        return max(0, k - j)

    def fiber_polynomial(self, w: complex) -> np.ndarray:
        return P.polysub(self.num, w * self.den)

    def solve_preimages(self, w) -> Fiber:
        wc = as_complex(w)
        D = self.degree
        if is_inf(wc):
            roots = self.poles()
        else:
            c = self.fiber_polynomial(wc)
            c = trim(c, TRIM_TOL)
            roots = poly_roots(c)
            missing = D - (len(c) - 1)
            if missing > 0:
                roots.append((INF, missing))
        res = max((chordal(self._eval(z), wc) for z, _ in roots if not is_inf(z)), default=0.0)
        return Fiber(roots, res, res > 1e-8)

    def conjugate(self, Mpost: MobiusMap, Mpre: MobiusMap) -> "RationalMap":
        """Coefficients of Mpost o R o Mpre."""
        D = self.degree
        a, b, c, d = Mpre.a, Mpre.b, Mpre.c, Mpre.d
        top = np.array([b, a], dtype=complex)
        bot = np.array([d, c], dtype=complex)

        def homog(coeffs):
            acc = np.zeros(D + 1, dtype=complex)
            for k, v in enumerate(coeffs):
                if v == 0:
                    continue
                term = v * P.polymul(P.polypow(top, k), P.polypow(bot, D - k))
                acc[: len(term)] += term
            return acc

        N = homog(self.num)
        Dn = homog(self.den)
        A, B, C, Dd = Mpost.a, Mpost.b, Mpost.c, Mpost.d
        num = A * N + B * Dn
        den = C * N + Dd * Dn
        scale = max(np.abs(num).max(), np.abs(den).max())
        num = trim(num, TRIM_TOL * scale / max(np.abs(num).max(), 1e-300))
        den = trim(den, TRIM_TOL * scale / max(np.abs(den).max(), 1e-300))
        return RationalMap(num, den)

    def common_root_gap(self) -> float:
        """min |num| over roots of den, relative; tiny values mean a shared factor."""
        if self.dd == 0 or self.dn == 0:
            return math.inf
        gap = math.inf
        for r, _ in poly_roots(self.den):
            scale = np.sum(np.abs(self.num) * abs(r) ** np.arange(len(self.num)))
            gap = min(gap, abs(complex(P.polyval(r, self.num))) / scale)
        return gap

    def to_json(self) -> dict:
        return {
            "num": [[v.real, v.imag] for v in self.num],
            "den": [[v.real, v.imag] for v in self.den],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RationalMap":
        num = np.array([complex(re, im) for re, im in data["num"]])
        den = np.array([complex(re, im) for re, im in data["den"]])
        return cls(num, den)


def critical_points(R: RationalMap):
    return R.critical_points()


def solve_preimages(R: RationalMap, w) -> Fiber:
    return R.solve_preimages(w)


def conjugate(R: RationalMap, Mpost: MobiusMap, Mpre: MobiusMap) -> RationalMap:
    return R.conjugate(Mpost, Mpre)


def group_points(points, radius: float = 1e-6) -> list[tuple[complex, int]]:
    """Merge nearby points (e.g. an expanded fibre) into (point, multiplicity)."""
    out: list[list] = []
    for z in points:
        for item in out:
            if (is_inf(z) and is_inf(item[0])) or (
                not is_inf(z) and not is_inf(item[0]) and abs(z - item[0]) <= radius * max(1.0, abs(z))
            ):
                item[1] += 1
                break
        else:
            out.append([z, 1])
    return [(z, m) for z, m in out]
