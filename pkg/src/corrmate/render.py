"""Raster images of the dynamical partition and of grand-orbit clouds (binary PPM)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correspondence import (
    LIMIT, TILING, UNDECIDED, Cloud, Correspondence, DomainSpec, audit_domain, classify_grid, eta_label, pixel_grid,
)
from .rational import RationalMap

MAX_SIDE = 16384

PALETTES = {
    "default": np.array(
        [
            [0, 0, 0],  # undecided
            [70, 130, 200],  # tiling
            [235, 190, 60],  # K1
            [200, 80, 60],  # K2
            [255, 255, 255],  # limit
        ],
        dtype=np.float64,
    ),
    "gray": np.array([[0, 0, 0], [90, 90, 90], [200, 200, 200], [150, 150, 150], [255, 255, 255]], dtype=np.float64),
}


class AuditError(RuntimeError):
    pass


@dataclass(frozen=True)
class RasterJob:
    R: RationalMap
    view: tuple = (-2.0, 2.0, -2.0, 2.0)
    width: int = 512
    height: int = 512
    max_iter: int = 200
    palette: str = "default"
    mode: str = "classify"
    chart: str = "plane"
    backend: str | None = field(default=None, compare=False)

    def __post_init__(self):
        x0, x1, y0, y1 = self.view
        if not (x1 > x0 and y1 > y0):
            raise ValueError("degenerate viewport")
        if not (0 < self.width <= MAX_SIDE and 0 < self.height <= MAX_SIDE):
            raise ValueError(f"resolution must be within 1..{MAX_SIDE}")
        if self.palette not in PALETTES:
            raise ValueError(f"unknown palette {self.palette!r}")
        if self.mode not in ("classify", "cloud-overlay"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.chart not in ("plane", "reciprocal"):
            raise ValueError(f"unknown chart {self.chart!r}")


@dataclass
class Raster:
    image: np.ndarray  # (H, W, 3) uint8
    labels: np.ndarray  # (H, W) uint8
    ranks: np.ndarray | None = None


def shade(labels: np.ndarray, ranks: np.ndarray | None, palette: str = "default") -> np.ndarray:
    """Label colours darkened with escape rank (rank 0 keeps the full colour)."""
    base = PALETTES[palette][labels]
    if ranks is not None:
        fade = 0.45 + 0.55 * np.exp(-np.asarray(ranks, dtype=np.float64) / 12.0)
        moving = (labels == TILING)[..., None]
        base = np.where(moving, base * fade[..., None], base)
    return np.clip(np.rint(base), 0, 255).astype(np.uint8)


def render_classification(job: RasterJob, audit: bool = True, dom: DomainSpec | None = None) -> Raster:
    C = Correspondence(job.R)
    if audit:
        rep = audit_domain(C, dom or DomainSpec(), samples=200)
        if not rep.ok:
            raise AuditError("; ".join(rep.failures))
    labels, ranks = classify_grid(C, job.view, job.width, job.height, job.max_iter, job.backend, job.chart)
    return Raster(shade(labels, ranks, job.palette), labels, ranks)


def cloud_counts(job: RasterJob, cloud: Cloud) -> np.ndarray:
    """Per-pixel hit counts, row 0 on top."""
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    pts = cloud.points
    if job.chart == "reciprocal":
        with np.errstate(divide="ignore", invalid="ignore"):
            pts = 1.0 / pts
    pts = pts[np.isfinite(pts)]
    x0, x1, y0, y1 = job.view
    col = np.floor((pts.real - x0) / (x1 - x0) * job.width).astype(np.int64)
    row = np.floor((y1 - pts.imag) / (y1 - y0) * job.height).astype(np.int64)
    ok = (col >= 0) & (col < job.width) & (row >= 0) & (row < job.height)
    counts = np.zeros((job.height, job.width), dtype=np.int64)
    np.add.at(counts, (row[ok], col[ok]), 1)
    return counts


def render_cloud(job: RasterJob, cloud: Cloud) -> Raster:
    """Log-density heat map of the cloud."""
    counts = cloud_counts(job, cloud)
    lit = counts > 0
    level = np.zeros(counts.shape)
    if lit.any():
        level[lit] = 0.35 + 0.65 * np.log1p(counts[lit]) / np.log1p(counts.max())
    white = PALETTES[job.palette][LIMIT]
    img = np.clip(np.rint(level[..., None] * white), 0, 255).astype(np.uint8)
    labels = np.where(lit, LIMIT, UNDECIDED).astype(np.uint8)
    return Raster(img, labels)


def render_overlay(job: RasterJob, cloud: Cloud, audit: bool = True) -> Raster:
    base = render_classification(job, audit)
    lit = cloud_counts(job, cloud) > 0
    labels = np.where(lit, LIMIT, base.labels).astype(np.uint8)
    img = base.image.copy()
    img[lit] = PALETTES[job.palette][LIMIT].astype(np.uint8)
    return Raster(img, labels, base.ranks)


def pullback_agreement(job: RasterJob, labels: np.ndarray, eta_labels: np.ndarray) -> float:
    """Agreement between a label raster and the raster of eta-images (K1/K2 swapped)."""
    decided = (labels != UNDECIDED) & (eta_labels != UNDECIDED)
    if not decided.any():
        return 1.0
    return float(np.mean(labels[decided] == eta_label(eta_labels[decided])))


def eta_lit_agreement(job: RasterJob, cloud: Cloud) -> float:
    """Fraction of lit pixels whose eta-image pixel (or a neighbour) is lit."""
    counts = cloud_counts(job, cloud)
    lit = counts > 0
    rows, cols = np.nonzero(lit)
    if rows.size == 0:
        return 1.0
    Z = pixel_grid(job.view, job.width, job.height)[rows, cols]
    img = Cloud(1.0 / Z, np.zeros(Z.size, dtype=np.int64))
    x0, x1, y0, y1 = job.view
    c = np.floor((img.points.real - x0) / (x1 - x0) * job.width).astype(np.int64)
    r = np.floor((y1 - img.points.imag) / (y1 - y0) * job.height).astype(np.int64)
    padded = np.pad(lit, 1)
    hit = np.zeros(rows.size, dtype=bool)
    inside = (c >= 0) & (c < job.width) & (r >= 0) & (r < job.height)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            rr = np.clip(r + dr + 1, 0, job.height + 1)
            cc = np.clip(c + dc + 1, 0, job.width + 1)
            hit |= inside & padded[rr, cc]
    return float(hit[inside].mean()) if inside.any() else 1.0


def write_ppm(path, image: np.ndarray) -> None:
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    pos += 1  # single whitespace before the raster
    if fields[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError("only 8-bit PPM supported")
    pix = np.frombuffer(data[pos : pos + w * h * 3], dtype=np.uint8)
    return pix.reshape(h, w, 3)
