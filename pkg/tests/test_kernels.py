import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from corrmate import kernels
from corrmate.bers import build
from corrmate.circle import FactorCircleMap
from corrmate.correspondence import Correspondence, pixel_grid

nb = kernels.get("numba")
npk = kernels.get("numpy")


def _coeffs(R):
    return R.num.astype(complex), R.den.astype(complex)


@pytest.fixture(scope="module")
def corr():
    return Correspondence(build("a", 1, 4))


def test_rat_eval_agrees(corr, rng):
    num, den = _coeffs(corr.R)
    z = rng.normal(size=300) + 1j * rng.normal(size=300)
    z = np.concatenate([z, [1e9 + 1e9j, np.inf]])
    got = np.array([nb.rat_eval(num, den, complex(x), complex(corr.r_inf)) for x in z])
    want = npk.rat_eval(num, den, z, complex(corr.r_inf))
    fin = np.isfinite(want)
    assert np.array_equal(fin, np.isfinite(got))
    assert np.allclose(got[fin], want[fin], rtol=1e-12, atol=1e-12)


def _largest_cluster(roots, radius=1e-2):
    r = np.asarray(roots)
    return int(max((np.abs(r - x) < radius).sum() for x in r))


@settings(max_examples=40)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=8))
def test_aberth_matches_batched_roots(roots):
    c = np.polynomial.polynomial.polyfromroots(roots).astype(complex)
    a = nb.aberth(c)
    b = npk.batched_roots(c[None, :])[0]
    # normwise backward error of each computed root
    size = np.abs(c).sum() * np.maximum(1.0, np.abs(a)) ** (c.size - 1)
    resid = np.abs(np.polynomial.polynomial.polyval(a, c)) / size
    assert resid.max() < 1e-12
    # an m-fold root is only determined to about eps^(1/m), times a conditioning factor
    m = _largest_cluster(roots)
    scale = max(1.0, max(abs(r) for r in roots))
    dist, _ = cKDTree(np.c_[b.real, b.imag]).query(np.c_[a.real, a.imag])
    assert dist.max() < 1e4 * np.finfo(float).eps ** (1 / m) * scale


def test_classify_labels_agree(corr):
    num, den = _coeffs(corr.R)
    Z = pixel_grid((-2.5, 2.5, -2.5, 2.5), 64, 64).ravel()
    early = corr.superattracting_infinity()
    la, ra = nb.classify(Z, num, den, 200, 1e-9, 1e6, early, complex(corr.r_inf))
    lb, rb = npk.classify(Z, num, den, 200, 1e-9, 1e6, early, complex(corr.r_inf))
    assert np.mean(la == lb) >= 0.999
    same = la == lb
    assert np.mean(ra[same] == rb[same]) >= 0.99


@pytest.mark.parametrize("n,p", [(1, 4), (3, 1), (4, 3)])
def test_circle_tables_agree(n, p, rng):
    Fm = FactorCircleMap.from_np(n, p)
    taus = rng.uniform(size=500)
    ta, ba = nb.preimage_table(taus, Fm._ginv, n, p)
    tb, bb = npk.preimage_table(taus, Fm._ginv, n, p)
    assert ba == bb == 0
    assert np.allclose(ta, tb, atol=1e-13)
    digits = rng.integers(0, n * p - 1, size=(50, 12))
    for right in (False, True):
        xa, _ = nb.nested_points(digits, right, Fm._ginv, n, p)
        xb, _ = npk.nested_points(digits, right, Fm._ginv, n, p)
        assert np.allclose(xa, xb, atol=1e-12)


def test_chaos_clouds_overlap(corr, rng):
    num, den = _coeffs(corr.R)
    choices = rng.integers(0, 2 * corr.d, size=(8, 2000))
    a = nb.chaos_walks(num, den, choices, 1 + 0j, complex(corr.r_inf)).ravel()
    b = npk.chaos_walks(num, den, choices, 1 + 0j, complex(corr.r_inf)).ravel()
    a, b = a[np.isfinite(a) & (abs(a) < 10)], b[np.isfinite(b) & (abs(b) < 10)]
    dist, _ = cKDTree(np.c_[a.real, a.imag]).query(np.c_[b.real, b.imag])
    assert np.mean(dist < 0.02) >= 0.95


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    env.pop("CORRMATE_NO_NUMBA", None)
    if env_value is not None:
        env["CORRMATE_NO_NUMBA"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "from corrmate import kernels; print(kernels.BACKEND, kernels.get().__name__)"],
        env=env, check=True, capture_output=True, text=True,
    )
    return out.stdout.split()


def test_env_flag_selects_numpy():
    assert _backend_in_subprocess("1") == ["numpy", "corrmate.kernels._numpy"]
    assert _backend_in_subprocess(None) == ["numba", "corrmate.kernels._numba"]


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("cuda")
