"""Compiled kernels.  Loop-per-point versions of the routines in ``_numpy``."""

import math

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * math.pi
EDGE = 1e-13


@njit(cache=True)
def poly_eval(c, z):
    acc = 0j
    for k in range(c.shape[0] - 1, -1, -1):
        acc = acc * z + c[k]
    return acc


@njit(cache=True)
def poly_eval_d(c, z):
    f = 0j
    df = 0j
    for k in range(c.shape[0] - 1, -1, -1):
        df = df * z + f
        f = f * z + c[k]
    return f, df


@njit(cache=True)
def aberth(c):
    """All roots of the polynomial with ascending coefficients ``c``."""
    m = c.shape[0] - 1
    while m > 0 and c[m] == 0:
        m -= 1
    roots = np.empty(m, dtype=np.complex128)
    if m == 0:
        return roots
    nz = 0
    while nz < m and c[nz] == 0:
        roots[nz] = 0j
        nz += 1
    k = m - nz
    if k == 0:
        return roots
    q = np.empty(k + 1, dtype=np.complex128)
    lead = c[m]
    for i in range(k + 1):
        q[i] = c[nz + i] / lead
    rad = 0.0
    for j in range(1, k + 1):
        v = abs(q[k - j]) ** (1.0 / j)
        if v > rad:
            rad = v
    rad = max(rad, 1e-12)
    z = np.empty(k, dtype=np.complex128)
    for i in range(k):
        ang = TWO_PI * i / k + 0.4
        z[i] = rad * complex(math.cos(ang), math.sin(ang))
    for _ in range(500):
        worst = 0.0
        for i in range(k):
            f, df = poly_eval_d(q, z[i])
            if f == 0:
                continue
            ratio = f / df if df != 0 else complex(1e-3 * (1.0 + abs(z[i])), 0.0)
            acc = 0j
            for j in range(k):
                if j != i:
                    diff = z[i] - z[j]
                    if diff != 0:
                        acc += 1.0 / diff
            step = ratio / (1.0 - ratio * acc)
            z[i] -= step
            rel = abs(step) / max(1.0, abs(z[i]))
            if rel > worst:
                worst = rel
        if worst < 1e-15:
            break
    for i in range(k):
        roots[nz + i] = z[i]
    return roots


@njit(cache=True)
def rat_eval(num, den, z, r_inf):
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return r_inf
    if abs(z) > 1e8:
        y = 1.0 / z
        dn = num.shape[0] - 1
        dd = den.shape[0] - 1
        nn = 0j
        for k in range(dn + 1):
            nn += num[k] * y ** (dn - k)
        dv = 0j
        for k in range(dd + 1):
            dv += den[k] * y ** (dd - k)
        if dv == 0:
            return complex(math.inf, 0.0)
        return nn / dv * z ** (dn - dd)
    dv = poly_eval(den, z)
    if dv == 0:
        return complex(math.inf, 0.0)
    return poly_eval(num, z) / dv


@njit(cache=True)
def fiber(num, den, w):
    m = max(num.shape[0], den.shape[0])
    c = np.zeros(m, dtype=np.complex128)
    for k in range(num.shape[0]):
        c[k] += num[k]
    for k in range(den.shape[0]):
        c[k] -= w * den[k]
    return aberth(c)


@njit(cache=True)
def _classify_one(z, num, den, max_iter, tol, bailout, early_k, r_inf):
    w = rat_eval(num, den, z, r_inf)
    for step in range(max_iter):
        if not (math.isfinite(w.real) and math.isfinite(w.imag)) or abs(w) > bailout:
            if early_k:
                return 4, step
            return 0, step
        roots = fiber(num, den, w)
        best = 0.0
        u = 0j
        for r in roots:
            if abs(r) > best:
                best = abs(r)
                u = r
        if best < 1.0 - tol:
            return 1, step
        w = rat_eval(num, den, 1.0 / u, r_inf)
    if early_k:
        return 0, max_iter
    return 4, max_iter


@njit(cache=True, parallel=True)
def classify(zs, num, den, max_iter, tol, bailout, early_k, r_inf):
    """Labels: 0 undecided, 1 tiling, 2 K on the outer side, 3 K on the inner side."""
    n = zs.shape[0]
    labels = np.zeros(n, dtype=np.uint8)
    ranks = np.zeros(n, dtype=np.int32)
    for i in prange(n):
        lab, rk = _classify_one(zs[i], num, den, max_iter, tol, bailout, early_k, r_inf)
        if lab == 4:
            z = zs[i]
            outer = not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z) >= 1.0 - tol
            lab = 2 if outer else 3
        labels[i] = lab
        ranks[i] = rk
    return labels, ranks


@njit(cache=True)
def _preimage_turns(tau, ginv, n, p, out):
    """Sorted circle preimages of ``tau`` (turns) under the factor map; returns the count."""
    cnt = 0
    np_ = n * p
    for s in range(p):
        a = s / np_
        b = (s + 1) / np_
        ga, gb, gc, gd = ginv[s, 0, 0], ginv[s, 0, 1], ginv[s, 1, 0], ginv[s, 1, 1]
        for k in range(n):
            ang = TWO_PI * (tau + k) / n
            w = complex(math.cos(ang), math.sin(ang))
            x = (ga * w + gb) / (gc * w + gd)
            t = math.atan2(x.imag, x.real) / TWO_PI
            if t < 0:
                t += 1.0
            if t > 1.0 - 1e-12:
                t -= 1.0
            if t >= a - EDGE and t < b - EDGE:
                t = min(max(t, a), b)
                if cnt < out.shape[0]:
                    out[cnt] = (n * t) % 1.0
                cnt += 1
    out[:min(cnt, out.shape[0])].sort()
    return cnt


@njit(cache=True)
def preimage_table(taus, ginv, n, p):
    d = n * p - 1
    res = np.empty((taus.shape[0], d))
    bad = 0
    buf = np.empty(n * p)
    for i in range(taus.shape[0]):
        cnt = _preimage_turns(taus[i], ginv, n, p, buf)
        if cnt != d:
            bad += 1
        res[i, :] = buf[:d]
    return res, bad


@njit(cache=True, parallel=True)
def nested_points(digits, right, ginv, n, p):
    """Apply sigma_{j1} o ... o sigma_{jD} to 0 (or 1 when ``right``) per row."""
    N, D = digits.shape
    d = n * p - 1
    out = np.empty(N)
    bad = np.zeros(N, dtype=np.int64)
    for i in prange(N):
        buf = np.empty(n * p)
        x = 1.0 if right else 0.0
        for lev in range(D - 1, -1, -1):
            j = digits[i, lev]
            if x >= 1.0:
                cnt = _preimage_turns(0.0, ginv, n, p, buf)
                x = buf[j + 1] if j + 1 < d else 1.0
            else:
                cnt = _preimage_turns(x, ginv, n, p, buf)
                x = buf[j]
            if cnt != d:
                bad[i] += 1
        out[i] = x
    return out, bad.sum()


@njit(cache=True)
def _branch(num, den, z, j, r_inf):
    """Branch ``j`` of the 2d forward/backward branches at ``z``."""
    d = max(num.shape[0], den.shape[0]) - 2
    if j < d:
        target = 1.0 / z
        w = rat_eval(num, den, target, r_inf)
    else:
        target = z
        w = rat_eval(num, den, z, r_inf)
    roots = fiber(num, den, w)
    drop = 0
    best = math.inf
    for k in range(roots.shape[0]):
        dist = abs(roots[k] - target)
        if dist < best:
            best = dist
            drop = k
    idx = j % d
    m = 0
    for k in range(roots.shape[0]):
        if k == drop:
            continue
        if m == idx:
            return roots[k] if j < d else 1.0 / roots[k]
        m += 1
    return target


@njit(cache=True, parallel=True)
def chaos_walks(num, den, choices, start, r_inf):
    W, S = choices.shape
    out = np.empty((W, S), dtype=np.complex128)
    for i in prange(W):
        z = start
        for t in range(S):
            nz = _branch(num, den, z, choices[i, t], r_inf)
            if not (math.isfinite(nz.real) and math.isfinite(nz.imag)) or abs(nz) > 1e8 or abs(nz) < 1e-8:
                nz = start
            z = nz
            out[i, t] = z
    return out
