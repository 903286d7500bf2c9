"""Arithmetic on the Riemann sphere.

Points are plain Python ``complex`` numbers internally, with the point at
infinity represented by :data:`INF`.  :class:`SpherePoint` is the tagged
wrapper used at API and file boundaries.  Anticonformal reflections are
exposed as functions only; they never become :class:`MobiusMap` objects.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .config import DEFAULT

INF = complex(math.inf, 0.0)


def is_inf(z) -> bool:
    return cmath.isinf(z) or cmath.isnan(z)


def chordal(z, w) -> float:
    """Chordal distance on the unit sphere (diameter 2)."""
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if wi:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def chordal_array(z, w):
    """Vectorised :func:`chordal`; non-finite entries count as infinity."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi = ~np.isfinite(z)
    wi = ~np.isfinite(w)
    zf = np.where(zi, 0, z)
    wf = np.where(wi, 0, w)
    az2 = np.abs(zf) ** 2
    aw2 = np.abs(wf) ** 2
    out = 2.0 * np.abs(zf - wf) / np.sqrt((1.0 + az2) * (1.0 + aw2))
    out = np.where(zi & ~wi, 2.0 / np.sqrt(1.0 + aw2), out)
    out = np.where(wi & ~zi, 2.0 / np.sqrt(1.0 + az2), out)
    return np.where(zi & wi, 0.0, out)


def to_sphere_coords(z):
    """Inverse stereographic projection onto the unit sphere in R^3."""
    z = np.asarray(z, dtype=complex)
    fin = np.isfinite(z)
    zf = np.where(fin, z, 0)
    r2 = np.abs(zf) ** 2
    xyz = np.stack([2 * zf.real, 2 * zf.imag, r2 - 1.0], axis=-1) / (1.0 + r2)[..., None]
    xyz[~fin] = (0.0, 0.0, 1.0)
    return xyz


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: finite complex or the point at infinity."""

    value: complex = 0j

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(INF)

    @property
    def is_infinite(self) -> bool:
        return is_inf(self.value)

    def chordal(self, other: "SpherePoint") -> float:
        return chordal(self.value, other.value)

    def close(self, other: "SpherePoint", eps: float | None = None) -> bool:
        eps = DEFAULT.epsilon if eps is None else eps
        if self.is_infinite or other.is_infinite:
            return self.is_infinite and other.is_infinite
        return abs(self.value - other.value) <= eps * max(1.0, abs(self.value))

    def to_json(self):
        if self.is_infinite:
            return "inf"
        return [self.value.real, self.value.imag]

    @classmethod
    def from_json(cls, data) -> "SpherePoint":
        if data == "inf":
            return cls.infinity()
        re, im = data
        return cls(complex(re, im))

    def __complex__(self):
        return complex(self.value)


PointLike = Union[complex, float, int, SpherePoint]


def as_complex(z: PointLike) -> complex:
    if isinstance(z, SpherePoint):
        return z.value
    z = complex(z)
    return INF if is_inf(z) else z


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(self.det) <= 1e-14 * scale * scale:
            raise ValueError("degenerate Mobius map (ad - bc = 0)")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "MobiusMap":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @classmethod
    def rotation(cls, omega: complex) -> "MobiusMap":
        return cls(omega, 0, 0, 1)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __call__(self, z: complex) -> complex:
        a, b, c, d = self.a, self.b, self.c, self.d
        if is_inf(z):
            return INF if c == 0 else a / c
        num = a * z + b
        den = c * z + d
        if den == 0:
            return INF
        return num / den

    def apply_array(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.a * z + self.b) / (self.c * z + self.d)
        fin = np.isfinite(z)
        if not fin.all():
            out[~fin] = INF if self.c == 0 else self.a / self.c
        out[~np.isfinite(out)] = INF
        return out

    def derivative(self, z: complex) -> complex:
        den = self.c * z + self.d
        return self.det / (den * den)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def normalized(self) -> "MobiusMap":
        """Determinant one, first non-negligible entry with non-negative real part."""
        m = self.matrix / cmath.sqrt(self.det)
        scale = np.abs(m).max()
        for entry in m.flat:
            if abs(entry) > 1e-12 * scale:
                if entry.real < -1e-15 * scale or (abs(entry.real) <= 1e-15 * scale and entry.imag < 0):
                    m = -m
                break
        return MobiusMap.from_matrix(m)

    def distance(self, other: "MobiusMap") -> float:
        """Matrix distance between normalised representatives, up to sign."""
        x = self.normalized().matrix
        y = other.normalized().matrix
        return float(min(np.abs(x - y).max(), np.abs(x + y).max()))

    def is_identity(self, tol: float = 1e-12) -> bool:
        return self.distance(MobiusMap.identity()) <= tol

    def to_json(self):
        return [[v.real, v.imag] for v in (complex(self.a), complex(self.b), complex(self.c), complex(self.d))]

    @classmethod
    def from_json(cls, data) -> "MobiusMap":
        return cls(*(complex(re, im) for re, im in data))


def mobius_apply(M: MobiusMap, z: PointLike):
    """Apply ``M``; returns a :class:`SpherePoint` when given one."""
    w = M(as_complex(z))
    return SpherePoint(w) if isinstance(z, SpherePoint) else w


def mobius_compose(M1: MobiusMap, M2: MobiusMap) -> MobiusMap:
    return M1 @ M2


def mobius_inverse(M: MobiusMap) -> MobiusMap:
    return M.inverse()


def _cross_ratio_map(z1, z2, z3) -> MobiusMap:
    # sends z1, z2, z3 to 0, 1, inf
    if is_inf(z1):
        return MobiusMap(0, z2 - z3, 1, -z3)
    if is_inf(z2):
        return MobiusMap(1, -z1, 1, -z3)
    if is_inf(z3):
        return MobiusMap(1, -z1, 0, z2 - z1)
    return MobiusMap(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def mobius_from_points(src, dst) -> MobiusMap:
    """The Mobius map carrying three distinct points ``src`` to ``dst``."""
    src = [as_complex(z) for z in src]
    dst = [as_complex(w) for w in dst]
    return _cross_ratio_map(*dst).inverse() @ _cross_ratio_map(*src)


ETA = MobiusMap(0, 1, 1, 0)


@dataclass(frozen=True)
class Geodesic:
    """Hyperbolic geodesic of the unit disk, given by its ideal endpoints."""

    u: complex
    v: complex

    def __post_init__(self):
        eps = DEFAULT.epsilon
        if abs(abs(self.u) - 1) > eps or abs(abs(self.v) - 1) > eps:
            raise ValueError("geodesic endpoints must lie on the unit circle")
        if abs(self.u - self.v) <= eps:
            raise ValueError("degenerate geodesic (coincident endpoints)")

    @property
    def is_diameter(self) -> bool:
        return abs(self.u + self.v) <= DEFAULT.epsilon

    def circle(self) -> tuple[complex, float]:
        """Centre and radius of the orthogonal circle carrying the geodesic."""
        if self.is_diameter:
            raise ValueError("a diameter has no finite orthogonal circle")
        u, v = self.u, self.v
        c = (u + v) / (1 + (u * v.conjugate()).real)
        return c, math.sqrt(abs(c) ** 2 - 1)

    def anti_matrix(self) -> np.ndarray:
        """Matrix A with reflection(z) = A(conj z)."""
        if self.is_diameter:
            return np.array([[self.u * self.u, 0], [0, 1]], dtype=complex)
        c, _ = self.circle()
        return np.array([[c, -1], [1, -c.conjugate()]], dtype=complex)

    def to_json(self):
        return [[self.u.real, self.u.imag], [self.v.real, self.v.imag]]


def reflect_in_geodesic(G: Geodesic, z: PointLike):
    """Anticonformal reflection in the geodesic ``G``."""
    zc = as_complex(z)
    if G.is_diameter:
        w = INF if is_inf(zc) else G.u * G.u * zc.conjugate()
    else:
        c, r = G.circle()
        if is_inf(zc):
            w = c
        elif zc == c:
            w = INF
        else:
            w = c + r * r / (zc - c).conjugate()
    return SpherePoint(w) if isinstance(z, SpherePoint) else w


def compose_reflections(first: Geodesic, second: Geodesic) -> MobiusMap:
    """The Mobius map ``reflect(second) o reflect(first)``."""
    return MobiusMap.from_matrix(second.anti_matrix() @ first.anti_matrix().conj())


def halfplane_contains(G: Geodesic, ccw: bool, z: PointLike, eps: float | None = None) -> bool:
    """Closed half-plane bounded by ``G`` on the side of a boundary arc.

    ``ccw=True`` designates the arc running counter-clockwise from ``G.u`` to
    ``G.v``; ``False`` the complementary arc.
    """
    eps = DEFAULT.epsilon if eps is None else eps
    zc = as_complex(z)
    if is_inf(zc):
        return False
    if G.is_diameter:
        side = (zc * G.u.conjugate()).imag
        return side >= -eps if ccw else side <= eps
    c, r = G.circle()
    turn = cmath.phase(G.v / G.u) % (2 * math.pi)
    minor_is_ccw = turn < math.pi
    inside = abs(zc - c) <= r + eps
    outside = abs(zc - c) >= r - eps
    return inside if ccw == minor_is_ccw else outside
