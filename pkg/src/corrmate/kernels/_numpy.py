"""Vectorised numpy kernels; same contracts as the compiled versions."""

import numpy as np

TWO_PI = 2.0 * np.pi
EDGE = 1e-13


def batched_roots(c):
    """Roots of each row of ascending coefficients ``c`` (shape (N, m+1), nonzero leading)."""
    c = np.asarray(c, dtype=complex)
    N, m1 = c.shape
    m = m1 - 1
    if m == 0:
        return np.empty((N, 0), dtype=complex)
    monic = c[:, :m] / c[:, m:]
    comp = np.zeros((N, m, m), dtype=complex)
    comp[:, 0, :] = -monic[:, ::-1]
    if m > 1:
        idx = np.arange(m - 1)
        comp[:, idx + 1, idx] = 1.0
    roots = np.linalg.eigvals(comp)
    # one Newton polish
    f = np.zeros_like(roots)
    df = np.zeros_like(roots)
    for k in range(m, -1, -1):
        df = df * roots + f
        f = f * roots + c[:, k : k + 1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        step = np.where(df != 0, f / df, 0)
    polished = roots - step
    ok = np.isfinite(polished) & (np.abs(step) < 1e-3 * (1 + np.abs(roots)))
    return np.where(ok, polished, roots)


def rat_eval(num, den, z, r_inf):
    z = np.asarray(z, dtype=complex)
    fin = np.isfinite(z)
    zf = np.where(fin, z, 0)
    big = np.abs(zf) > 1e8
    out = np.empty(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nv = np.polynomial.polynomial.polyval(zf, num)
        dv = np.polynomial.polynomial.polyval(zf, den)
        out[...] = nv / dv
        out[dv == 0] = np.inf
        if big.any():
            zb = zf[big]
            y = 1.0 / zb
            dn, dd = len(num) - 1, len(den) - 1
            nn = np.polynomial.polynomial.polyval(y, num[::-1])
            dvv = np.polynomial.polynomial.polyval(y, den[::-1])
            out[big] = nn / dvv * zb ** (dn - dd)
    out[~fin] = r_inf
    out[~np.isfinite(out)] = np.inf
    return out


def fiber_rows(num, den, w):
    m = max(len(num), len(den))
    c = np.zeros((w.shape[0], m), dtype=complex)
    c[:, : len(num)] += num
    c[:, : len(den)] -= w[:, None] * den
    return batched_roots(c)


def classify(zs, num, den, max_iter, tol, bailout, early_k, r_inf):
    zs = np.asarray(zs, dtype=complex)
    n = zs.shape[0]
    labels = np.zeros(n, dtype=np.uint8)
    ranks = np.full(n, max_iter, dtype=np.int32)
    w = rat_eval(num, den, zs, r_inf)
    active = np.arange(n)
    stay = np.zeros(n, dtype=bool)
    for step in range(max_iter):
        if active.size == 0:
            break
        wa = w[active]
        huge = ~np.isfinite(wa) | (np.abs(np.where(np.isfinite(wa), wa, 0)) > bailout)
        if huge.any():
            idx = active[huge]
            ranks[idx] = step
            if early_k:
                stay[idx] = True
            active = active[~huge]
            wa = wa[~huge]
        if active.size == 0:
            break
        roots = fiber_rows(num, den, wa)
        mods = np.abs(roots)
        pick = np.argmax(mods, axis=1)
        best = mods[np.arange(active.size), pick]
        esc = best < 1.0 - tol
        idx = active[esc]
        labels[idx] = 1
        ranks[idx] = step
        keep = ~esc
        u = roots[np.arange(active.size), pick][keep]
        active = active[keep]
        w[active] = rat_eval(num, den, 1.0 / u, r_inf)
    if not early_k:
        stay[active] = True
    fin = np.isfinite(zs)
    outer = ~fin | (np.abs(np.where(fin, zs, 0)) >= 1.0 - tol)
    labels[stay & outer] = 2
    labels[stay & ~outer] = 3
    return labels, ranks


def preimage_turns(taus, ginv, n, p):
    """(N, d) sorted circle preimages of each target angle, plus the count of bad rows."""
    taus = np.asarray(taus, dtype=float)
    d = n * p - 1
    np_ = n * p
    ks = np.arange(n)
    w = np.exp(1j * TWO_PI * (taus[:, None] + ks[None, :]) / n)  # (N, n)
    cands, valid = [], []
    for s in range(p):
        a, b = s / np_, (s + 1) / np_
        g = ginv[s]
        x = (g[0, 0] * w + g[0, 1]) / (g[1, 0] * w + g[1, 1])
        t = np.angle(x) / TWO_PI
        t = np.where(t < 0, t + 1.0, t)
        t = np.where(t > 1.0 - 1e-12, t - 1.0, t)
        ok = (t >= a - EDGE) & (t < b - EDGE)
        cands.append((n * np.clip(t, a, b)) % 1.0)
        valid.append(ok)
    cands = np.concatenate(cands, axis=1)
    valid = np.concatenate(valid, axis=1)
    counts = valid.sum(axis=1)
    cands = np.where(valid, cands, np.inf)
    cands.sort(axis=1)
    return cands[:, :d], int((counts != d).sum())


def preimage_table(taus, ginv, n, p):
    return preimage_turns(taus, ginv, n, p)


def nested_points(digits, right, ginv, n, p):
    N, D = digits.shape
    d = n * p - 1
    x = np.full(N, 1.0 if right else 0.0)
    base, bad0 = preimage_turns(np.zeros(1), ginv, n, p)
    ones_row = np.append(base[0], 1.0)
    bad = 0
    rows = np.arange(N)
    for lev in range(D - 1, -1, -1):
        j = digits[:, lev]
        at_one = x >= 1.0
        table, b = preimage_turns(np.where(at_one, 0.0, x), ginv, n, p)
        bad += b
        nxt = table[rows, np.minimum(j, d - 1)]
        x = np.where(at_one, ones_row[j + 1], nxt)
    return x, bad


def _branch_many(num, den, z, j, r_inf):
    d = max(len(num), len(den)) - 2
    fwd = j < d
    target = np.where(fwd, 1.0 / z, z)
    w = rat_eval(num, den, target, r_inf)
    roots = fiber_rows(num, den, w)
    drop = np.argmin(np.abs(roots - target[:, None]), axis=1)
    idx = j % d
    col = idx + (idx >= drop)
    r = roots[np.arange(z.shape[0]), col]
    return np.where(fwd, r, 1.0 / r)


def chaos_walks(num, den, choices, start, r_inf):
    W, S = choices.shape
    out = np.empty((W, S), dtype=complex)
    z = np.full(W, start, dtype=complex)
    for t in range(S):
        with np.errstate(all="ignore"):
            nz = _branch_many(num, den, z, choices[:, t], r_inf)
        bad = ~np.isfinite(nz) | (np.abs(nz) > 1e8) | (np.abs(nz) < 1e-8)
        nz[bad] = start
        z = nz
        out[:, t] = z
    return out
