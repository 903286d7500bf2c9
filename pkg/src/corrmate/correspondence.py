"""The d:d correspondence  (R(w) - R(1/z)) / (w - 1/z) = 0  and its dynamics."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .config import DEFAULT, Config, resolve
from .rational import TRIM_TOL, RationalMap, _taylor, poly_roots, trim
from .sphere import INF, MobiusMap, SpherePoint, as_complex, chordal, is_inf, mobius_from_points, to_sphere_coords

UNDECIDED, TILING, K1, K2, LIMIT = 0, 1, 2, 3, 4
LABELS = {UNDECIDED: "undecided", TILING: "tiling", K1: "K1", K2: "K2", LIMIT: "limit"}


def eta(z: complex) -> complex:
    if is_inf(z):
        return 0j
    if z == 0:
        return INF
    return 1.0 / z


def eta_label(label):
    """The label of eta(z) implied by the label of z (K1 and K2 swap)."""
    lab = np.asarray(label)
    return np.where(lab == K1, K2, np.where(lab == K2, K1, lab))


def deflate(c: np.ndarray, r: complex) -> np.ndarray:
    """Divide p(x) by (x - r); runs from the stable end for |r| > 1."""
    m = len(c) - 1
    q = np.zeros(m, dtype=complex)
    if abs(r) <= 1:
        acc = c[m]
        for k in range(m - 1, -1, -1):
            q[k] = acc
            acc = c[k] + r * acc
    else:
        prev = 0j
        for k in range(m):
            prev = (prev - c[k]) / r
            q[k] = prev
    return q


@dataclass(frozen=True)
class Correspondence:
    R: RationalMap
    marked_point: complex = 1 + 0j

    @property
    def d(self) -> int:
        return self.R.degree - 1

    @property
    def r_inf(self) -> complex:
        return self.R.value_at_infinity()

    def superattracting_infinity(self) -> bool:
        return is_inf(self.r_inf) and self.R.pole_order_at_zero() >= 2

    def _deflated_fiber(self, w: complex, drop: complex) -> list[tuple[complex, int]]:
        """Fibre of ``w`` with one copy of ``drop`` removed."""
        R = self.R
        D = R.degree
        if is_inf(w):
            c = trim(R.den.copy())
            n_inf = max(R.dn - R.dd, 0)
        else:
            c = trim(R.fiber_polynomial(w), TRIM_TOL)
            n_inf = D - (len(c) - 1)
        if is_inf(drop):
            if n_inf < 1:
                raise ArithmeticError("point to deflate is not in the fibre")
            n_inf -= 1
        else:
            c = deflate(c, drop)
        roots = poly_roots(c) if len(c) > 1 else []
        if n_inf:
            roots.append((INF, n_inf))
        return roots

    def forward_roots(self, z) -> list[tuple[complex, int]]:
        z = as_complex(z)
        ez = eta(z)
        return self._deflated_fiber(self.R(ez), ez)

    def backward_roots(self, w) -> list[tuple[complex, int]]:
        w = as_complex(w)
        return [(eta(x), m) for x, m in self._deflated_fiber(self.R(w), w)]

    def forward(self, z) -> list[complex]:
        return [x for x, m in self.forward_roots(z) for _ in range(m)]

    def backward(self, w) -> list[complex]:
        return [x for x, m in self.backward_roots(w) for _ in range(m)]

    def contains(self, z, w, tol: float = 1e-8) -> bool:
        """Membership of (z, w) via the fibre of R(1/z)."""
        return any(chordal(x, as_complex(w)) <= tol for x in self.forward(z))

    def to_json(self) -> dict:
        return {"R": self.R.to_json(), "marked_point": [self.marked_point.real, self.marked_point.imag]}


def forward(C: Correspondence, z):
    return C.forward(z)


def backward(C: Correspondence, w):
    return C.backward(w)


def set_distance(A, B) -> float:
    """Hausdorff-type chordal distance between finite point multisets (greedy matching)."""
    A, B = list(A), list(B)
    if len(A) != len(B):
        return math.inf
    worst = 0.0
    left = list(B)
    for a in A:
        dists = [chordal(a, b) for b in left]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j])
        left.pop(j)
    return worst


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class DomainSpec:
    """The Jordan domain on the side of infinity bounded by a curve."""

    kind: str = "unit_circle"
    points: tuple = ()  # polygon vertices when kind == "polygon"

    def __post_init__(self):
        if self.kind not in ("unit_circle", "polygon"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "polygon" and len(self.points) < 3:
            raise ValueError("polygon needs at least three vertices")

    def contains(self, z, tol: float = 0.0):
        """Closure membership of the domain (vectorised)."""
        z = np.asarray(z, dtype=complex)
        fin = np.isfinite(z)
        zf = np.where(fin, z, 0)
        if self.kind == "unit_circle":
            inside = np.abs(zf) >= 1.0 - tol
        else:
            inside = ~_point_in_polygon(zf, np.asarray(self.points, dtype=complex))
        return inside | ~fin

    def distance(self, z) -> np.ndarray:
        """Euclidean distance from finite points to the boundary curve."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "unit_circle":
            return np.abs(np.abs(z) - 1.0)
        poly = np.asarray(self.points, dtype=complex)
        a, b = poly, np.roll(poly, -1)
        ab = b - a
        t = np.clip(((z[..., None] - a) * ab.conj()).real / np.abs(ab) ** 2, 0, 1)
        return np.abs(z[..., None] - (a + t * ab)).min(axis=-1)

    def curve(self, k: int = 512) -> np.ndarray:
        if self.kind == "unit_circle":
            return np.exp(2j * np.pi * np.arange(k) / k)
        return np.asarray(self.points, dtype=complex)

    def eta_hausdorff(self, k: int = 512) -> float:
        cv = self.curve(k)
        tree = cKDTree(to_sphere_coords(cv))
        dist, _ = tree.query(to_sphere_coords(1.0 / cv))
        return float(dist.max())


def _point_in_polygon(z: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = z.real, z.imag
    inside = np.zeros(z.shape, dtype=bool)
    px, py = poly.real, poly.imag
    j = len(poly) - 1
    for i in range(len(poly)):
        cond = (py[i] > y) != (py[j] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (px[j] - px[i]) * (y - py[i]) / (py[j] - py[i]) + px[i]
        inside ^= cond & (x < xint)
        j = i
    return inside


@dataclass
class DomainAudit:
    ok: bool
    eta_hausdorff: float
    boundary_critical: int
    min_margin: float
    failures: list


def audit_domain(C: Correspondence, dom: DomainSpec, p: int | None = None, samples: int = 400, seed: int = 0) -> DomainAudit:
    """Check eta-invariance of the curve and injectivity of R on the closed domain."""
    fails = []
    haus = dom.eta_hausdorff()
    if haus > 1e-6:
        fails.append(f"curve not eta-invariant (Hausdorff {haus:.2e})")
    crit = [z for z, m in C.R.critical_points() for _ in range(m) if not is_inf(z)]
    on_curve = [z for z in crit if dom.distance(z) < 1e-6]
    if p is not None and len(on_curve) != p:
        fails.append(f"{len(on_curve)} critical points on the curve, expected {p}")
    rng = np.random.default_rng(seed)
    if dom.kind == "unit_circle":
        radii = 1.0 / rng.uniform(0.02, 0.98, samples)
        pts = radii * np.exp(2j * np.pi * rng.uniform(size=samples))
    else:
        box = np.abs(np.asarray(dom.points)).max() * 3
        pts = rng.uniform(-box, box, samples) + 1j * rng.uniform(-box, box, samples)
        pts = pts[dom.contains(pts)]
    margin = math.inf
    for z in pts:
        fib = C.R.solve_preimages(C.R(z)).points
        inside = [u for u in fib if bool(dom.contains(np.array([u]), 1e-9)[0])]
        if len(inside) != 1:
            fails.append(f"R not injective on the domain near {z:.4g}")
            break
        others = [u for u in fib if u is not inside[0]]
        if dom.kind == "unit_circle" and others:
            margin = min(margin, 1.0 - max(abs(u) for u in others if not is_inf(u)))
    return DomainAudit(not fails, haus, len(on_curve), margin, fails)


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class PointClass:
    label: int
    rank: int
    margin: float  # gap between the selected fibre point and the runner-up

    @property
    def name(self) -> str:
        return LABELS[self.label]


def classify_point(C: Correspondence, z, dom: DomainSpec | None = None, max_iter: int | None = None,
                   config: Config | None = None) -> PointClass:
    """Label of z from the orbit of R(z) under F(w) = R(1/u), u the fibre point in the domain."""
    cfg = resolve(config)
    dom = dom or DomainSpec()
    max_iter = cfg.max_iter if max_iter is None else max_iter
    tol = cfg.epsilon
    z = as_complex(z)
    w = C.R(z)
    early = C.superattracting_infinity()
    margin = math.inf
    stay = False
    rank = max_iter
    for step in range(max_iter):
        if is_inf(w) or abs(w) > 1e6:
            rank = step
            stay = early
            break
        fib = C.R.solve_preimages(w).points
        fin = np.array([u for u in fib if not is_inf(u)], dtype=complex)
        if dom.kind == "unit_circle":
            mods = np.sort(np.abs(fin))[::-1]
            if mods[0] < 1.0 - tol:
                return PointClass(TILING, step, margin)
            if len(mods) > 1:
                margin = min(margin, mods[0] - mods[1])
            u = fin[np.argmax(np.abs(fin))]
        else:
            inside = fin[dom.contains(fin, 0.0)]
            if inside.size == 0:
                return PointClass(TILING, step, margin)
            u = inside[0]
        w = C.R(eta(u))
    else:
        stay = not early
    if not stay:
        return PointClass(UNDECIDED, rank, margin)
    outer = bool(dom.contains(np.array([z]), tol)[0])
    return PointClass(K1 if outer else K2, rank, margin)


def classify_points(C: Correspondence, zs, max_iter: int | None = None, backend: str | None = None,
                    config: Config | None = None):
    """Vectorised classification for the unit-circle domain: (labels, ranks)."""
    cfg = resolve(config)
    max_iter = cfg.max_iter if max_iter is None else max_iter
    zs = np.ascontiguousarray(np.asarray(zs, dtype=complex).ravel())
    k = kernels.get(backend)
    num = np.ascontiguousarray(C.R.num)
    den = np.ascontiguousarray(C.R.den)
    return k.classify(zs, num, den, int(max_iter), float(cfg.epsilon), 1e6, C.superattracting_infinity(),
                      complex(C.r_inf))


def pixel_grid(view, width: int, height: int, chart: str = "plane") -> np.ndarray:
    """Pixel-centre coordinates (row 0 on top); ``chart='reciprocal'`` maps through 1/z."""
    x0, x1, y0, y1 = view
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate viewport")
    xs = x0 + (np.arange(width) + 0.5) * (x1 - x0) / width
    ys = y1 - (np.arange(height) + 0.5) * (y1 - y0) / height
    Z = xs[None, :] + 1j * ys[:, None]
    if chart == "reciprocal":
        with np.errstate(divide="ignore"):
            Z = np.where(Z == 0, INF, 1.0 / np.where(Z == 0, 1, Z))
    return Z


def classify_grid(C: Correspondence, view, width: int, height: int, max_iter: int | None = None,
                  backend: str | None = None, chart: str = "plane", config: Config | None = None):
    Z = pixel_grid(view, width, height, chart)
    lab, rk = classify_points(C, Z.ravel(), max_iter, backend, config)
    return lab.reshape(Z.shape), rk.reshape(Z.shape)


def eta_agreement(C: Correspondence, view, width: int, height: int, max_iter: int | None = None,
                  backend: str | None = None) -> tuple[float, np.ndarray, np.ndarray]:
    """Fraction of decided pixels whose label matches the label at the eta-image."""
    Z = pixel_grid(view, width, height)
    lab, _ = classify_points(C, Z.ravel(), max_iter, backend)
    with np.errstate(divide="ignore"):
        EZ = np.where(Z == 0, INF, 1.0 / np.where(Z == 0, 1, Z))
    lab_eta, _ = classify_points(C, EZ.ravel(), max_iter, backend)
    decided = (lab != UNDECIDED) & (lab_eta != UNDECIDED)
    agree = lab[decided] == eta_label(lab_eta[decided])
    frac = float(agree.mean()) if agree.size else 1.0
    return frac, lab.reshape(Z.shape), lab_eta.reshape(Z.shape)


# ---------------------------------------------------------------- grand orbit


@dataclass(frozen=True)
class Cloud:
    points: np.ndarray
    rank: np.ndarray

    def __len__(self):
        return len(self.points)


def _bfs_backward(C: Correspondence, start: complex, depth: int):
    pts, ranks = [start], [0]
    layer = [start]
    for k in range(1, depth + 1):
        nxt = []
        for z in layer:
            nxt.extend(x for x in C.backward(z) if not is_inf(x) and abs(x) < 1e8)
        pts.extend(nxt)
        ranks.extend([k] * len(nxt))
        layer = nxt
    return pts, ranks


def grand_orbit_cloud(C: Correspondence, budget: int, rng_seed: int | None = None, workers: int = 1,
                      walkers: int = 16, bfs_depth: int | None = None, backend: str | None = None) -> Cloud:
    """Random forward/backward branch walk from the marked point plus full backward layers."""
    if budget < 1:
        raise ValueError("budget must be positive")
    seed = DEFAULT.with_env().seed if rng_seed is None else rng_seed
    start = complex(C.marked_point)
    d = C.d
    if bfs_depth is None:
        bfs_depth, total = 0, 1
        while total + d ** (bfs_depth + 1) <= max(budget // 4, 1) and bfs_depth < 12:
            bfs_depth += 1
            total += d**bfs_depth
    pts, ranks = _bfs_backward(C, start, bfs_depth)
    k = kernels.get(backend)
    num = np.ascontiguousarray(C.R.num)
    den = np.ascontiguousarray(C.R.den)
    children = np.random.SeedSequence(seed).spawn(workers)
    per_worker = max(budget // workers, 1)
    blocks = []
    for child in children:
        rng = np.random.default_rng(child)
        steps = max(per_worker // walkers, 1)
        choices = rng.integers(0, 2 * d, size=(walkers, steps))
        walk = k.chaos_walks(num, den, choices, start, complex(C.r_inf))
        blocks.append(walk)
    walk_pts = np.concatenate([b.ravel() for b in blocks])
    walk_rank = np.concatenate([np.tile(np.arange(1, b.shape[1] + 1), b.shape[0]) for b in blocks])
    points = np.concatenate([np.asarray(pts, dtype=complex), walk_pts])
    rank = np.concatenate([np.asarray(ranks), walk_rank])
    return Cloud(points, rank)


def eta_symmetry(cloud: Cloud, radius: float) -> float:
    """Fraction of cloud points whose eta-image lies within chordal ``radius`` of the cloud."""
    pts = cloud.points
    tree = cKDTree(to_sphere_coords(pts))
    dist, _ = tree.query(to_sphere_coords(1.0 / pts))
    return float(np.mean(dist <= radius))


# ---------------------------------------------------------------- deck transformation


# images of the trust disk under tau bulge slightly past it
TRUST_SLACK = 1.5


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DeckModel:
    """Local model of the deck transformation at a critical point of multiplicity n-1."""

    C: Correspondence
    n: int
    p: int
    centres: tuple  # the p critical points of multiplicity n-1, in cyclic order
    leading: tuple  # R(z) ~ value + c_j (z - a_j)^n
    value: complex
    trust_radius: float

    @property
    def x0(self) -> complex:
        return self.centres[0]

    def zeta(self, j: int, z: complex) -> complex:
        """Local coordinate at centre j with R = value + zeta^n."""
        a, c = self.centres[j], self.leading[j]
        ratio = (self.C.R(z) - self.value) / (c * (z - a) ** self.n)
        return (z - a) * c ** (1.0 / self.n) * ratio ** (1.0 / self.n)

    def ordered_fiber(self, z: complex) -> list[complex]:
        """Fibre of R(z) listed as z, tau(z), tau^2(z), ... (z must be near a centre)."""
        n, p = self.n, self.p
        j0 = int(np.argmin([abs(z - a) for a in self.centres]))
        fib = self.C.R.solve_preimages(self.C.R(z)).points
        base = self.zeta(j0, z)
        omega = cmath.exp(2j * math.pi / n)
        out = []
        used = set()
        for k in range(n * p):
            j = (j0 + k) % p
            wraps = (j0 + k) // p
            target = base * omega**wraps
            cands = [(abs(self.zeta(j, u) - target), i) for i, u in enumerate(fib)
                     if i not in used and abs(u - self.centres[j]) < 2 * self.trust_radius + abs(z - self.centres[j0])]
            if not cands:
                raise ContinuationError("local model lost a fibre point")
            _, i = min(cands)
            used.add(i)
            out.append(fib[i])
        return out


def deck_model(C: Correspondence, n: int, p: int, trust_radius: float | None = None) -> DeckModel:
    if n < 2:
        raise ValueError("the local deck model needs a critical point of multiplicity n-1 >= 1")
    crit = [(z, m) for z, m in C.R.critical_points() if not is_inf(z) and m == n - 1 and abs(z) > 1e-9]
    vals = [C.R(z) for z, _ in crit]
    if len(crit) < p:
        raise ValueError("no tiling critical points of multiplicity n-1")
    # the p points sharing one critical value
    v0 = vals[0]
    centres = [z for (z, _), v in zip(crit, vals) if abs(v - v0) < 1e-8 * max(1, abs(v0))]
    if len(centres) != p:
        raise ValueError("critical points of multiplicity n-1 do not share a value")
    centres.sort(key=lambda a: cmath.phase(a) % (2 * math.pi))
    lead = []
    for a in centres:
        top = C.R.num.astype(complex)
        top = np.pad(top, (0, max(0, len(C.R.den) - len(top))))
        top[: len(C.R.den)] -= v0 * C.R.den
        lead.append(_taylor(top, a, n) / complex(np.polyval(C.R.den[::-1], a)))
    if trust_radius is None:
        others = [z for z, _ in C.R.critical_points() if not is_inf(z) and all(abs(z - a) > 1e-9 for a in centres)]
        others += [z for z, _ in C.R.poles() if not is_inf(z)]
        gap = min(abs(z - a) for z in others for a in centres) if others else 1.0
        trust_radius = 0.1 * gap
    return DeckModel(C, n, p, tuple(centres), tuple(lead), v0, float(trust_radius))


def _fast_fiber(C: Correspondence, z: complex) -> list:
    """Unclustered finite fibre of R(z) for path following."""
    k = kernels.get("numpy")
    num, den = C.R.num.astype(complex), C.R.den.astype(complex)
    w = k.rat_eval(num, den, np.array([z]), complex(C.r_inf))
    roots = k.fiber_rows(num, den, w)[0]
    return [complex(u) for u in roots if np.isfinite(u)]


def continue_fiber(C: Correspondence, ordered: list, path, min_step: float = 1e-12) -> list:
    """Carry an ordered fibre along a polyline by nearest matching with adaptive steps."""
    cur = list(ordered)
    path = [as_complex(x) for x in path]
    z = path[0]
    for target in path[1:]:
        t, h = 0.0, 1.0
        seg = target - z
        while t < 1.0:
            h = min(h, 1.0 - t)
            znew = z + (t + h) * seg
            fib = _fast_fiber(C, znew)
            nxt, ok = [], True
            pool = list(fib)
            for u in cur:
                dists = sorted((abs(v - u), i) for i, v in enumerate(pool))
                if len(dists) > 1 and dists[0][0] > 0.3 * dists[1][0]:
                    ok = False
                    break
                nxt.append(pool.pop(dists[0][1]))
            if not ok:
                h *= 0.5
                if h * abs(seg) < min_step:
                    raise ContinuationError(f"continuation lost track of the fibre near {znew:.6g}")
                continue
            cur = nxt
            t += h
            h = min(2 * h, 1.0)
        z = target
    return cur


def deck_tau(C: Correspondence, z, n: int, p: int, path=None, model: DeckModel | None = None) -> SpherePoint | complex:
    """tau(z): local model near the tiling critical point, continuation along ``path`` otherwise.

    ``path`` is a polyline ending at z whose first vertex lies in the trust region.
    """
    model = model or deck_model(C, n, p)
    zc = as_complex(z)
    if path is None:
        if min(abs(zc - a) for a in model.centres) > TRUST_SLACK * model.trust_radius:
            raise ValueError("z outside the trust region: supply a continuation path")
        if zc in model.centres:
            out = zc
        else:
            out = model.ordered_fiber(zc)[1]
    else:
        path = list(path)
        if abs(as_complex(path[-1]) - zc) > 1e-12:
            path.append(zc)
        start = as_complex(path[0])
        out = continue_fiber(C, model.ordered_fiber(start), path)[1]
    return SpherePoint(out) if isinstance(z, SpherePoint) else out


# ---------------------------------------------------------------- ping-pong


@dataclass
class PingPongReport:
    words: int
    min_displacement: float
    worst_word: str
    relation_residual: dict
    violations: list
    bridge_labels: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class _Tracker:
    """Points carried with a path from a fixed anchor, so tau can be continued."""

    def __init__(self, model: DeckModel, anchor: complex, bridge=None):
        self.m = model
        self.C = model.C
        self.anchor = anchor
        self.order = model.n * model.p
        self.anchor_fiber = model.ordered_fiber(anchor)
        ea = eta(anchor)
        self.bridge = list(bridge) if bridge is not None else [anchor, ea]

    def approach(self, z: complex) -> list:
        """Anchor -> z around x0 (arc, then radial) so the path never meets x0."""
        a, x0 = self.anchor, self.m.x0
        r, th = abs(a - x0), cmath.phase(a - x0)
        dth = (cmath.phase(z - x0) - th + math.pi) % (2 * math.pi) - math.pi
        steps = max(2, int(abs(dth) * 8))
        pts = [x0 + r * cmath.exp(1j * (th + dth * s / steps)) for s in range(steps + 1)]
        return pts + [z]

    def arc(self, k: int) -> list:
        a, x0 = self.anchor, self.m.x0
        r, th = abs(a - x0), cmath.phase(a - x0)
        steps = max(4, 8 * k)
        pts = [x0 + r * cmath.exp(1j * (th + 2 * math.pi * k / self.m.n * s / steps)) for s in range(steps + 1)]
        pts[-1] = self.anchor_fiber[k]
        return pts

    def tau(self, state, k: int):
        z, path = state
        k %= self.order
        if k == 0:
            return state
        images = [self.anchor_fiber[k]]
        cur = list(self.anchor_fiber)
        for a, b in zip(path[:-1], path[1:]):
            cur = continue_fiber(self.C, cur, [a, b])
            images.append(cur[k])
        return cur[k], self.arc(k)[:-1] + images

    def eta(self, state):
        z, path = state
        return eta(z), self.bridge + [eta(x) for x in path[1:]]


def _reduced_words(max_len: int, order: int):
    """Reduced words as tuples of ('e',) / ('t', k), applied right to left."""
    letters = [("e", 0)] + [("t", k) for k in range(1, order)]
    words = [()]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for L in letters:
                if w and w[0][0] == L[0]:
                    continue
                nxt.append((L,) + w)
        words.extend(nxt)
        frontier = nxt
    return words[1:]


def _word_name(w) -> str:
    return " ".join("eta" if L[0] == "e" else f"tau^{L[1]}" for L in w)


def pingpong_check(C: Correspondence, n: int, p: int, samples, max_word_len: int = 6, delta: float = 1e-4,
                   model: DeckModel | None = None, anchor: complex | None = None, bridge=None,
                   relation_tol: float = 1e-8) -> PingPongReport:
    """Every reduced word in eta and tau moves every sample by more than ``delta``."""
    model = model or deck_model(C, n, p)
    x0 = model.x0
    if anchor is None:
        # step from x0 towards eta(x0) so the straight bridge to eta(anchor) avoids x0
        direction = eta(x0) - x0
        anchor = x0 + 0.5 * model.trust_radius * direction / abs(direction)
    tr = _Tracker(model, anchor, bridge)
    order = n * p
    rel = {"eta^2": 0.0, f"tau^{order}": 0.0}
    states = []
    for s in samples:
        s = as_complex(s)
        state = (s, tr.approach(s))
        e2 = tr.eta(tr.eta(state))[0]
        rel["eta^2"] = max(rel["eta^2"], abs(e2 - s))
        cur = state
        for _ in range(order):
            cur = tr.tau(cur, 1)
        rel[f"tau^{order}"] = max(rel[f"tau^{order}"], abs(cur[0] - s))
        states.append(state)
    violations = [f"{k} residual {v:.2e}" for k, v in rel.items() if v > relation_tol]
    letters = [("e", 0)] + [("t", k) for k in range(1, order)]
    min_disp, worst, count = math.inf, "", 0

    def walk(word, sts, depth):
        nonlocal min_disp, worst, count
        if word:
            count += 1
            disp = min(chordal(st[0], s0[0]) for st, s0 in zip(sts, states))
            if disp < min_disp:
                min_disp, worst = disp, _word_name(word)
            if disp <= delta:
                violations.append(f"{_word_name(word)} displaces by {disp:.2e}")
        if depth == max_word_len:
            return
        for L in letters:
            if word and word[0][0] == L[0]:
                continue
            nxt = [tr.eta(st) if L[0] == "e" else tr.tau(st, L[1]) for st in sts]
            walk((L,) + word, nxt, depth + 1)

    walk((), states, 0)
    bridge_pts = np.array(tr.bridge[1:-1] or [0.5 * (tr.bridge[0] + tr.bridge[-1])])
    labels = [LABELS[int(x)] for x in classify_points(C, bridge_pts)[0]]
    return PingPongReport(count, min_disp, worst, rel, violations, labels)


# ---------------------------------------------------------------- equivalence


@dataclass
class Equivalence:
    M: MobiusMap
    M2: MobiusMap
    candidates: list

    @property
    def ambiguous(self) -> bool:
        return len(self.candidates) > 1


def _centralizer_candidates(x: complex, y: complex):
    out = []
    if is_inf(x) or is_inf(y):
        if is_inf(x) and not is_inf(y):
            out += [MobiusMap(y, 1, 1, y) if abs(y * y - 1) > 1e-12 else None,
                    MobiusMap(y, -1, 1, -y) if abs(y * y - 1) > 1e-12 else None]
        return [m for m in out if m is not None]
    for a, b, kind in ((x * y - 1, x - y, 1), (x * y + 1, x + y, 2)):
        if abs(a * a - b * b) < 1e-12 * max(1.0, abs(a) ** 2 + abs(b) ** 2):
            continue
        out.append(MobiusMap(a, b, b, a) if kind == 1 else MobiusMap(a, -b, b, -a))
    return out


def are_equivalent(C1: Correspondence, C2: Correspondence, tol: float = 1e-8, seed: int = 0) -> Equivalence | None:
    """Search M in the centraliser of eta and a Mobius M2 with R1 = M2 o R2 o M."""
    R1, R2 = C1.R, C2.R
    if R1.degree != R2.degree:
        return None
    c1 = R1.critical_points()
    c2 = R2.critical_points()
    if sorted(m for _, m in c1) != sorted(m for _, m in c2):
        return None
    rng = np.random.default_rng(seed)
    ts = rng.normal(size=19) + 1j * rng.normal(size=19)
    found: list[tuple[MobiusMap, MobiusMap]] = []
    for (x, mx), (y, my) in product(c1, c2):
        if mx != my:
            continue
        for M in _centralizer_candidates(x, y):
            if any(M.distance(F) < 1e-6 for F, _ in found):
                continue
            src = [R2(M(t)) for t in ts[:3]]
            dst = [R1(t) for t in ts[:3]]
            try:
                M2 = mobius_from_points(src, dst)
            except (ValueError, ZeroDivisionError):
                continue
            if all(chordal(M2(R2(M(t))), R1(t)) <= tol for t in ts[3:]):
                found.append((M.normalized(), M2.normalized()))
    if not found:
        return None
    found.sort(key=lambda f: f[0].distance(MobiusMap.identity()))
    M, M2 = found[0]
    return Equivalence(M, M2, found)
