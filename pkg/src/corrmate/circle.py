"""Bowen-Series maps, their factor maps on the circle, and the circle conjugacy.

Angles on the circle are measured in turns, t in [0, 1), so that the point is
exp(2 pi i t).  The factor map is handled on the circle through the sector
[0, 1/n) of the w-plane: the angle t corresponds to the w-angle t/n.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .group import GroupData, build_group
from .sphere import INF, SpherePoint, as_complex, halfplane_contains, is_inf

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Input outside the domain of definition of a map."""


def _turns(z: complex) -> float:
    t = cmath.phase(z) / TWO_PI
    return t + 1.0 if t < 0 else t


@dataclass(frozen=True)
class BowenSeriesMap:
    group: GroupData

    def piece(self, z: complex) -> tuple[int, int]:
        """(r, s) of the piece acting at ``z``."""
        G = self.group
        if is_inf(z) or abs(z) > 1 + 1e-9:
            raise DomainError("point outside the closed unit disk")
        if abs(abs(z) - 1) <= 1e-12:
            return G.arc_index(_turns(z))
        for key, geo in G.geodesics.items():
            if halfplane_contains(geo, True, z, eps=1e-12):
                return key
        raise DomainError("point lies inside the fundamental polygon")

    def __call__(self, z) -> complex:
        zc = as_complex(z)
        w = self.group.g(*self.piece(zc))(zc)
        return SpherePoint(w) if isinstance(z, SpherePoint) else w

    def on_circle(self, t) -> np.ndarray:
        """Vectorised evaluation at angles ``t`` (turns)."""
        G = self.group
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        k = np.floor(t * G.n * G.p).astype(int) % (G.n * G.p)
        mats = np.stack([G.g(kk // G.p + 1, kk % G.p + 1).matrix for kk in range(G.n * G.p)])
        m = mats[k]
        z = np.exp(1j * TWO_PI * t)
        return (m[..., 0, 0] * z + m[..., 0, 1]) / (m[..., 1, 0] * z + m[..., 1, 1])


def eval_bs(B: BowenSeriesMap, z):
    return B(z)


@dataclass(frozen=True)
class FactorCircleMap:
    base: BowenSeriesMap
    n: int
    _ginv: np.ndarray = field(init=False, repr=False, compare=False)
    _g: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        G = self.base.group
        g = G.first_sector_matrices()
        ginv = np.stack([G.g(1, s).inverse().matrix for s in range(1, G.p + 1)])
        object.__setattr__(self, "_g", g)
        object.__setattr__(self, "_ginv", np.ascontiguousarray(ginv))

    @classmethod
    def from_np(cls, n: int, p: int) -> "FactorCircleMap":
        return cls(BowenSeriesMap(build_group(n, p)), n)

    @property
    def group(self) -> GroupData:
        return self.base.group

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def degree(self) -> int:
        return self.n * self.p - 1

    def principal_root(self, z: complex) -> complex:
        if z == 0:
            return 0j
        t = _turns(z)
        return abs(z) ** (1.0 / self.n) * cmath.exp(2j * math.pi * t / self.n)

    def __call__(self, z) -> complex:
        zc = as_complex(z)
        if is_inf(zc):
            raise DomainError("infinity is outside the domain")
        w = self.base(self.principal_root(zc))
        out = w**self.n
        return SpherePoint(out) if isinstance(z, SpherePoint) else out

    def with_root(self, z: complex, k: int) -> complex:
        """Evaluate using the k-th n-th root of ``z`` instead of the principal one."""
        w = self.principal_root(z) * cmath.exp(2j * math.pi * k / self.n)
        return self.base(w) ** self.n

    def branch_index(self, t) -> np.ndarray:
        """Index s-1 of the side-pairing used at circle angle ``t``."""
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return np.minimum(np.floor(t * self.p).astype(int), self.p - 1)

    def on_circle(self, t, branch=None) -> np.ndarray:
        """Image angles (turns) of angles ``t``; ``branch`` forces a piece."""
        t = np.mod(np.asarray(t, dtype=float), 1.0) if branch is None else np.asarray(t, dtype=float)
        s = self.branch_index(t) if branch is None else np.broadcast_to(branch, t.shape)
        m = self._g[s]
        w = np.exp(1j * TWO_PI * t / self.n)
        img = (m[..., 0, 0] * w + m[..., 0, 1]) / (m[..., 1, 0] * w + m[..., 1, 1])
        return np.mod(self.n * np.angle(img) / TWO_PI, 1.0)

    def speed(self, t, branch=None) -> np.ndarray:
        """Derivative of the circle map in angle coordinates, |g'(w)|."""
        t = np.mod(np.asarray(t, dtype=float), 1.0) if branch is None else np.asarray(t, dtype=float)
        s = self.branch_index(t) if branch is None else np.broadcast_to(branch, t.shape)
        m = self._g[s]
        w = np.exp(1j * TWO_PI * t / self.n)
        det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
        return np.abs(det / (m[..., 1, 0] * w + m[..., 1, 1]) ** 2)

    def preimages(self, t) -> np.ndarray:
        """Sorted circle preimages of each angle, shape (..., d)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        table, bad = kernels.get().preimage_table(np.mod(t, 1.0), self._ginv, self.n, self.p)
        if bad:
            raise ArithmeticError(f"{bad} preimage fibres with wrong cardinality")
        return table


def eval_fbs(Fm: FactorCircleMap, z):
    return Fm(z)


def lift_degree(Fm: FactorCircleMap, samples: int = 1 << 15) -> tuple[int, float]:
    """Degree of the circle map from a monotone lift, plus the worst lift error."""
    t = np.arange(samples + 1) / samples
    img = Fm.on_circle(t)
    steps = np.diff(img)
    steps = np.mod(steps, 1.0)
    if steps.max() > 0.5 or steps.min() <= 0:
        raise ArithmeticError("sampling too coarse for a monotone lift")
    total = steps.sum()
    deg = int(round(total))
    return deg, abs(total - deg)


def _winding(Fm: FactorCircleMap, centre: complex, radius: float, k: int = 256) -> int:
    angs = np.arange(k + 1) / k
    vals = np.array([Fm(centre + radius * cmath.exp(2j * math.pi * a)) for a in angs])
    ph = np.unwrap(np.angle(vals))
    return int(round((ph[-1] - ph[0]) / TWO_PI))


@dataclass(frozen=True)
class CriticalPoint:
    point: complex
    multiplicity: int
    value: complex
    local_degree: int  # numerical evidence from a winding count
    forward_image_point: complex  # the same index s using g_{1,s}(0)


def critical_points_fbs(Fm: FactorCircleMap) -> list[CriticalPoint]:
    """Critical points of the factor map inside the disk, with numerical evidence."""
    n, G = Fm.n, Fm.group
    if n < 2:
        return []
    out = []
    for s in range(1, G.p + 1):
        g = G.g(1, s)
        x = g.inverse()(0j) ** n
        alt = g(0j) ** n
        val = Fm(x)
        rad = 1e-3 * (1 - abs(x))
        out.append(CriticalPoint(x, n - 1, val, _winding(Fm, x, rad), alt))
    return out


@dataclass(frozen=True)
class MarkovPartition:
    breakpoints: np.ndarray  # sorted angles in turns, starting at 0
    branch: np.ndarray  # side-pairing index per piece
    image_start: np.ndarray  # index of the breakpoint hit by each left end
    image_end: np.ndarray
    endpoint_error: float

    @property
    def pieces(self) -> int:
        return len(self.breakpoints)

    def transitions(self) -> np.ndarray:
        """0/1 matrix: piece i covers piece j."""
        k = self.pieces
        T = np.zeros((k, k), dtype=np.int8)
        for i in range(k):
            j = self.image_start[i]
            while True:
                T[i, j] = 1
                j = (j + 1) % k
                if j == self.image_end[i]:
                    break
        return T


def _merge(points, tol=1e-12) -> np.ndarray:
    pts = np.sort(np.mod(np.asarray(points, dtype=float), 1.0))
    pts = np.where(pts > 1 - tol, 0.0, pts)
    pts = np.sort(pts)
    keep = np.concatenate([[True], np.diff(pts) > tol])
    return pts[keep]


def markov_partition(Fm: FactorCircleMap, full_pullback: bool = False, tol: float = 1e-8) -> MarkovPartition:
    """Breakpoints from the arc ends plus one pullback.

    The default pulls back the image of the roots of unity (the point 1), which
    is where the Bowen-Series map jumps.  ``full_pullback`` pulls back every arc
    end instead, giving a finer partition that is also Markov.
    """
    p = Fm.p
    base = np.arange(p) / p
    targets = base if full_pullback else np.zeros(1)
    pre = Fm.preimages(targets).ravel()
    bps = _merge(np.concatenate([base, pre]))
    k = len(bps)
    ends = np.append(bps[1:], 1.0)
    mids = 0.5 * (bps + ends)
    branch = Fm.branch_index(mids)
    left = Fm.on_circle(bps, branch)
    right = Fm.on_circle(ends, branch)
    err = 0.0
    idx_l = np.empty(k, dtype=int)
    idx_r = np.empty(k, dtype=int)
    for i in range(k):
        for arr, val in ((idx_l, left[i]), (idx_r, right[i])):
            dist = np.abs(np.mod(bps - val + 0.5, 1.0) - 0.5)
            j = int(np.argmin(dist))
            err = max(err, float(dist[j]))
            arr[i] = j
    if err > tol:
        raise ArithmeticError(f"partition is not Markov (endpoint error {err:.2e})")
    return MarkovPartition(bps, branch, idx_l, idx_r, err)


@dataclass(frozen=True)
class ExpansivityReport:
    lam: float
    grid: int
    per_piece: np.ndarray


def expansivity_report(Fm: FactorCircleMap, grid: int = 10_000) -> ExpansivityReport:
    """Minimum of |derivative| over a midpoint grid of every partition piece (an estimate)."""
    mp = markov_partition(Fm)
    ends = np.append(mp.breakpoints[1:], 1.0)
    u = (np.arange(grid) + 0.5) / grid
    per = np.empty(mp.pieces)
    for i, (a, b) in enumerate(zip(mp.breakpoints, ends)):
        t = a + (b - a) * u
        per[i] = Fm.speed(t, mp.branch[i]).min()
    return ExpansivityReport(float(per.min()), grid, per)


def _expansion(theta: Fraction, d: int, depth: int) -> tuple[list[int], bool, tuple[int, int] | None]:
    """Base-d digits, whether the expansion terminates, and (preperiod, period) if it cycles early."""
    out = []
    seen = {}
    x = theta
    cycle = None
    for i in range(depth):
        if cycle is None:
            if x in seen:
                cycle = (seen[x], i - seen[x])
            else:
                seen[x] = i
        x *= d
        j = int(x)
        out.append(j)
        x -= j
    return out, x == 0, cycle


def _as_fraction(theta) -> Fraction:
    f = theta if isinstance(theta, Fraction) else Fraction(theta)
    return f - math.floor(f)


def _sigma_piece(Fm: FactorCircleMap, x: float, j: int) -> tuple[float, np.ndarray]:
    """The j-th sorted preimage of x, with the w-plane Mobius matrix producing it."""
    n, p = Fm.n, Fm.p
    cands = []
    for s in range(p):
        a, b = s / (n * p), (s + 1) / (n * p)
        for k in range(n):
            rot = np.array([[cmath.exp(2j * math.pi * k / n), 0], [0, 1]])
            m = Fm._ginv[s] @ rot
            w = cmath.exp(2j * math.pi * x / n)
            xw = (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])
            t = _turns(xw)
            if t > 1 - 1e-12:
                t -= 1.0
            if a - 1e-13 <= t < b - 1e-13:
                cands.append(((n * min(max(t, a), b)) % 1.0, m))
    cands.sort(key=lambda c: c[0])
    if len(cands) != Fm.degree:
        raise ArithmeticError("preimage fibre with wrong cardinality")
    return cands[j]


def _periodic_point(Fm: FactorCircleMap, tail: list[int], guess: float) -> float:
    """Exact h-value of a purely periodic itinerary: fixed point of the inverse-branch word."""
    x = guess
    M = np.eye(2, dtype=complex)
    for j in reversed(tail):
        x, m = _sigma_piece(Fm, x, j)
        M = m @ M
    a, b, c, dd = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    w0 = cmath.exp(2j * math.pi * x / Fm.n)
    if abs(c) < 1e-14 * abs(M).max():
        return x
    disc = cmath.sqrt((dd - a) ** 2 + 4 * b * c)
    r1 = (a - dd + disc) / (2 * c)
    r2 = (a - dd - disc) / (2 * c)
    if abs(r1 - r2) < 1e-6:
        w = 0.5 * (r1 + r2)  # (near) parabolic: the mean is well conditioned
    else:
        w = r1 if abs(r1 - w0) < abs(r2 - w0) else r2
    return (Fm.n * _turns(w / abs(w))) % 1.0


def conjugacy_turns(Fm: FactorCircleMap, thetas, depth: int = 40, backend: str | None = None) -> np.ndarray:
    """Angles (turns) of the conjugacy h at each input angle.

    Generic angles use nested intervals of depth ``depth``.  Terminating
    expansions return the exact left end.  Expansions that become periodic
    within ``depth`` digits are solved exactly through the fixed point of the
    periodic inverse-branch word; this avoids the slow convergence of nested
    intervals at parabolic cycles.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    d = Fm.degree
    fr = [_as_fraction(t) for t in np.atleast_1d(np.asarray(thetas, dtype=object))]
    digits = np.empty((len(fr), depth), dtype=np.int64)
    exact = np.empty(len(fr), dtype=bool)
    cycles = {}
    for i, f in enumerate(fr):
        ds, ex, cyc = _expansion(f, d, depth)
        digits[i] = ds
        exact[i] = ex
        if cyc is not None and not ex:
            cycles[i] = cyc
    k = kernels.get(backend)
    left, bad_l = k.nested_points(digits, False, Fm._ginv, Fm.n, Fm.p)
    right, bad_r = k.nested_points(digits, True, Fm._ginv, Fm.n, Fm.p)
    if bad_l or bad_r:
        raise ArithmeticError("preimage fibre with wrong cardinality during refinement")
    out = np.where(exact, left, 0.5 * (left + right))
    tails = {}
    for i, (pre, per) in cycles.items():
        key = tuple(digits[i, pre : pre + per])
        if key not in tails:
            rep = np.array([list(key) * (depth // per + 1)], dtype=np.int64)[:, :depth]
            guess, _ = k.nested_points(rep, False, Fm._ginv, Fm.n, Fm.p)
            tails[key] = _periodic_point(Fm, list(key), float(guess[0]))
        x = tails[key]
        for j in reversed(digits[i, :pre]):
            x, _ = _sigma_piece(Fm, x, int(j))
        out[i] = x
    return np.mod(out, 1.0)


def conjugacy_h(Fm: FactorCircleMap, theta, depth: int = 40) -> SpherePoint:
    lam = expansivity_report(Fm, grid=1000).lam
    if lam <= 1:
        raise ValueError("map is not expansive; conjugacy unsupported")
    t = conjugacy_turns(Fm, [theta], depth)[0]
    return SpherePoint(cmath.exp(2j * math.pi * t))


def conjugacy_defect(Fm: FactorCircleMap, thetas, depth: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """(h angles, chordal defect |A(h(theta)) - h(d theta)|) at each angle."""
    d = Fm.degree
    fr = [_as_fraction(t) for t in thetas]
    h = conjugacy_turns(Fm, fr, depth)
    h2 = conjugacy_turns(Fm, [(f * d) % 1 for f in fr], depth)
    img = Fm.on_circle(h)
    z1 = np.exp(1j * TWO_PI * img)
    z2 = np.exp(1j * TWO_PI * h2)
    return h, np.abs(z1 - z2)  # chordal distance equals |z1 - z2| on the unit circle


def cyclically_monotone(angles) -> bool:
    """True when the sequence winds exactly once positively (cyclic order preserved)."""
    a = np.asarray(angles, dtype=float)
    steps = np.mod(np.diff(np.append(a, a[0])), 1.0)
    return bool(abs(steps.sum() - 1.0) < 1e-9)
