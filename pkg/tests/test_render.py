import hashlib

import numpy as np
import pytest

from corrmate.bers import build
from corrmate.correspondence import K1, LIMIT, TILING, Cloud, Correspondence, classify_point, grand_orbit_cloud, pixel_grid
from corrmate.render import (
    AuditError, RasterJob, cloud_counts, eta_lit_agreement, read_ppm, render_classification, render_cloud,
    render_overlay, write_ppm,
)
from corrmate.rational import RationalMap

A4 = build("a", 1, 4)


@pytest.fixture(scope="module")
def raster():
    return render_classification(RasterJob(A4, (-2.5, 2.5, -2.5, 2.5), 96, 96))


def test_deterministic_bytes(raster, tmp_path):
    again = render_classification(RasterJob(A4, (-2.5, 2.5, -2.5, 2.5), 96, 96))
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    write_ppm(a, raster.image)
    write_ppm(b, again.image)
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_ppm_roundtrip(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, (5, 7, 3), dtype=np.uint8)
    img[0, 0] = [10, 32, 9]  # whitespace-valued bytes at the start of the raster
    path = tmp_path / "x.ppm"
    write_ppm(path, img)
    assert path.read_bytes().startswith(b"P6\n7 5\n255\n")
    assert np.array_equal(read_ppm(path), img)


def test_labels_match_pointwise_classifier(raster):
    C = Correspondence(A4)
    Z = pixel_grid((-2.5, 2.5, -2.5, 2.5), 96, 96)
    rng = np.random.default_rng(2)
    idx = rng.integers(0, 96, (1000, 2))
    got = raster.labels[idx[:, 0], idx[:, 1]]
    want = np.array([classify_point(C, Z[i, j]).label for i, j in idx])
    assert np.mean(got == want) >= 0.99


def test_reciprocal_chart_centre_is_k1():
    r = render_classification(RasterJob(A4, (-0.1, 0.1, -0.1, 0.1), 9, 9, chart="reciprocal"))
    assert r.labels[4, 4] == K1


def test_tiling_window_is_uniform():
    r = render_classification(RasterJob(build("c", 3, 1), (-0.52, -0.48, -0.02, 0.02), 8, 8))
    assert np.all(r.labels == TILING)
    assert len({tuple(px) for px in r.image.reshape(-1, 3)}) == 1


def test_audit_failure_propagates():
    # z + 1/z^3 without the 1/3: boundary critical points leave the unit circle
    bad = RationalMap.laurent({1: 1.0, -3: 1.0})
    with pytest.raises(AuditError):
        render_classification(RasterJob(bad, (-2, 2, -2, 2), 8, 8))


def test_single_point_cloud():
    r = render_cloud(RasterJob(A4, (-1, 1, -1, 1), 32, 32), Cloud(np.array([0.3 + 0.2j]), np.array([0])))
    assert (r.labels == LIMIT).sum() == 1
    assert (r.image.sum(axis=2) > 0).sum() == 1


def test_bigger_budget_lights_superset():
    C = Correspondence(A4)
    job = RasterJob(A4, (-2.5, 2.5, -2.5, 2.5), 64, 64)
    small = grand_orbit_cloud(C, 2000, rng_seed=4, walkers=4, bfs_depth=3)
    big = grand_orbit_cloud(C, 4000, rng_seed=4, walkers=4, bfs_depth=3)
    lit_small = cloud_counts(job, small) > 0
    lit_big = cloud_counts(job, big) > 0
    assert np.all(lit_big[lit_small])


def test_cloud_lighting_symmetric():
    C = Correspondence(A4)
    job = RasterJob(A4, (-2.5, 2.5, -2.5, 2.5), 128, 128)
    assert eta_lit_agreement(job, grand_orbit_cloud(C, 30000, rng_seed=0)) >= 0.98


def test_overlay_marks_cloud():
    job = RasterJob(A4, (-2.5, 2.5, -2.5, 2.5), 32, 32, mode="cloud-overlay")
    r = render_overlay(job, Cloud(np.array([1 + 0j]), np.array([0])))
    assert (r.labels == LIMIT).sum() == 1


@pytest.mark.parametrize(
    "kw", [dict(view=(1, 0, 0, 1)), dict(width=0), dict(height=20000), dict(palette="x"), dict(mode="y"), dict(chart="z")]
)
def test_job_validation(kw):
    with pytest.raises(ValueError):
        RasterJob(A4, **kw)
