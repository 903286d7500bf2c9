"""The Fuchsian groups built from an ideal np-gon and their orbifold arithmetic."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import SCHEMA
from .sphere import Geodesic, MobiusMap, compose_reflections


def _unit(turns: float) -> complex:
    return cmath.exp(2j * math.pi * turns)


@dataclass(frozen=True)
class GroupData:
    n: int
    p: int
    omega: complex
    geodesics: dict = field(repr=False)  # (r, s) -> Geodesic
    arcs: dict = field(repr=False)  # (r, s) -> (start, end) in turns
    generators: dict = field(repr=False)  # (r, s) -> MobiusMap
    ell: Geodesic = field(repr=False)

    @property
    def d(self) -> int:
        return self.n * self.p - 1

    @property
    def rotation(self) -> MobiusMap:
        return MobiusMap.rotation(self.omega)

    def g(self, r: int, s: int) -> MobiusMap:
        return self.generators[(r, s)]

    def arc_index(self, turns: float) -> tuple[int, int]:
        """(r, s) of the arc containing the angle, arcs closed on the left."""
        k = int(math.floor((turns % 1.0) * self.n * self.p)) % (self.n * self.p)
        return k // self.p + 1, k % self.p + 1

    def first_sector_matrices(self) -> np.ndarray:
        """Stacked normalised matrices of g_{1,1}, ..., g_{1,p}."""
        return np.stack([self.generators[(1, s)].matrix for s in range(1, self.p + 1)])

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "n": self.n,
            "p": self.p,
            "generators": {f"{r},{s}": g.to_json() for (r, s), g in sorted(self.generators.items())},
            "geodesics": {f"{r},{s}": G.to_json() for (r, s), G in sorted(self.geodesics.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "GroupData":
        return build_group(int(data["n"]), int(data["p"]))


def build_group(n: int, p: int) -> GroupData:
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if n * p < 3:
        raise ValueError(f"np must be at least 3 (got n={n}, p={p})")
    omega = _unit(1.0 / n)
    ell = Geodesic(_unit(0.5 / n), -_unit(0.5 / n))
    geodesics, arcs, generators = {}, {}, {}
    base = {}
    for s in range(1, p + 1):
        lo, hi = (s - 1) / (n * p), s / (n * p)
        C = Geodesic(_unit(lo), _unit(hi))
        base[s] = compose_reflections(C, ell).normalized()
    rot = MobiusMap.rotation(omega)
    rot_k = MobiusMap.identity()
    for r in range(1, n + 1):
        for s in range(1, p + 1):
            lo = (r - 1) / n + (s - 1) / (n * p)
            hi = (r - 1) / n + s / (n * p)
            geodesics[(r, s)] = Geodesic(_unit(lo), _unit(hi))
            arcs[(r, s)] = (lo, hi)
            generators[(r, s)] = (rot_k @ base[s] @ rot_k.inverse()).normalized()
        rot_k = rot @ rot_k
    return GroupData(n, p, omega, geodesics, arcs, generators, ell)


def side_pairing_residuals(G: GroupData) -> dict:
    """Matrix residuals of the defining relations of the side-pairings."""
    n, p = G.n, G.p
    inv_res = max(
        (G.g(1, s) @ G.g(1, p + 1 - s)).distance(MobiusMap.identity()) for s in range(1, p + 1)
    )
    rot = G.rotation
    conj_res = 0.0
    rot_k = MobiusMap.identity()
    for r in range(1, n + 1):
        for s in range(1, p + 1):
            expected = rot_k @ G.g(1, s) @ rot_k.inverse()
            conj_res = max(conj_res, G.g(r, s).distance(expected))
        rot_k = rot @ rot_k
    end_res = 0.0
    for s in range(1, p + 1):
        src = G.geodesics[(1, s)]
        dst = G.geodesics[(1, p + 1 - s)]
        g = G.g(1, s)
        end_res = max(end_res, abs(g(src.u) - dst.v), abs(g(src.v) - dst.u))
    out = {"inverse_pairs": inv_res, "rotation_conjugacy": conj_res, "endpoint_pairing": end_res}
    if p % 2 == 1:
        g = G.g(1, (p + 1) // 2)
        out["involution"] = (g @ g).distance(MobiusMap.identity())
    return out


@dataclass(frozen=True)
class OrbifoldSignature:
    punctures: int
    order2_points: int
    orderN_points: int
    order_value: int

    def __post_init__(self):
        if min(self.punctures, self.order2_points, self.orderN_points) < 0:
            raise ValueError("signature counts must be non-negative")

    @property
    def euler_characteristic(self) -> Fraction:
        chi = Fraction(2 - self.punctures) - Fraction(self.order2_points, 2)
        if self.orderN_points:
            chi -= self.orderN_points * (1 - Fraction(1, self.order_value))
        return chi

    @property
    def cone_points(self) -> int:
        return self.order2_points + self.orderN_points


def quotient_signature(n: int, p: int, extended: bool = False) -> OrbifoldSignature:
    if n * p < 3:
        raise ValueError("np must be at least 3")
    if not extended:
        if p % 2 == 0:
            return OrbifoldSignature(n * p // 2 + 1, 0, 0, n)
        return OrbifoldSignature(n * (p - 1) // 2 + 1, n, 0, n)
    order_n = 1 if n >= 2 else 0
    if p % 2 == 0:
        return OrbifoldSignature(p // 2 + 1, 0, order_n, n)
    return OrbifoldSignature((p + 1) // 2, 1, order_n, n)


def orbifold_to_np(delta1: int, delta2: int, delta3: int, nu: int | None = None) -> tuple[int, int, int]:
    """(n, p, d) realising a punctured sphere with at most two cone points."""
    if delta1 < 1 or delta2 not in (0, 1) or delta3 not in (0, 1):
        raise ValueError("need delta1 >= 1 and delta2, delta3 in {0, 1}")
    if delta3 == 1 and (nu is None or nu < 3):
        raise ValueError("nu >= 3 required when delta3 = 1")
    n = nu if delta3 == 1 else 1
    p = 2 * (delta1 - 1) if delta2 == 0 else 2 * delta1 - 1
    chi = Fraction(2 - delta1) - Fraction(delta2, 2)
    if delta3:
        chi -= 1 - Fraction(1, nu)
    if n * p < 3 or chi >= 0:
        raise ValueError("signature is not hyperbolic (np < 3)")
    d = n * p - 1
    check = 1 - 2 * (nu if delta3 else 1) * chi
    if check != d:
        raise ArithmeticError(f"degree identity failed: {d} != {check}")
    return n, p, d


def teich_dimension(n: int, p: int) -> int:
    """Complex dimension of the Teichmuller space of the extended quotient orbifold."""
    sig = quotient_signature(n, p, extended=True)
    return sig.punctures + sig.cone_points - 3
