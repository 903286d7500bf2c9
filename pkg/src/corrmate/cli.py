"""Command-line entry point: ``corrmate <subcommand> ...``.

Exit codes: 0 success, 1 audit or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import kernels
from .bers import build, validate_family
from .circle import (
    FactorCircleMap, conjugacy_defect, critical_points_fbs, cyclically_monotone, lift_degree, markov_partition,
)
from .config import DEFAULT, SCHEMA, Config
from .correspondence import (
    LABELS, Correspondence, ContinuationError, are_equivalent, classify_grid, grand_orbit_cloud,
)
from .group import GroupData, build_group
from .normal_form import NormalFormError, bp_normalize
from .rational import RationalMap
from .render import AuditError, RasterJob, render_classification, render_cloud, render_overlay, write_ppm
from .sphere import is_inf
from .verify import run_suites


class Failure(Exception):
    """Audit or validation failure (exit code 1)."""


def _enc(z):
    return "inf" if is_inf(z) else [float(z.real), float(z.imag)]


def _point(text: str) -> complex:
    if text.strip().lower() == "inf":
        return complex(float("inf"), 0)
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected RE,IM but got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _floats(text: str, count: int) -> list[float]:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != count:
        raise ValueError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _px(text: str) -> tuple[int, int]:
    w, _, h = text.lower().partition("x")
    return int(w), int(h)


def _load(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_map(path: str) -> RationalMap:
    data = _load(path)
    return RationalMap.from_json(data.get("R", data))


def _emit(payload: dict, cfg: Config, out: str | None = None) -> None:
    doc = {"schema": SCHEMA, "config": cfg.to_json(), **payload}
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------- handlers


def cmd_group_build(args, cfg):
    G = build_group(args.n, args.p)
    doc = G.to_json()
    doc.pop("schema")
    _emit(doc, cfg, args.out)


def _group_arg(args) -> GroupData:
    if args.group:
        return GroupData.from_json(_load(args.group))
    if args.n is None or args.p is None:
        raise ValueError("give --group or both --n and --p")
    return build_group(args.n, args.p)


def cmd_circle_eval(args, cfg):
    G = _group_arg(args)
    Fm = FactorCircleMap.from_np(G.n, G.p)
    z = _point(args.z)
    _emit({"n": G.n, "p": G.p, "z": _enc(z), "value": _enc(Fm(z))}, cfg)


def cmd_circle_info(args, cfg):
    G = _group_arg(args)
    Fm = FactorCircleMap.from_np(G.n, G.p)
    deg, err = lift_degree(Fm)
    part = markov_partition(Fm, full_pullback=args.full_pullback)
    crit = critical_points_fbs(Fm)
    _emit(
        {
            "n": G.n,
            "p": G.p,
            "lift_degree": deg,
            "lift_error": err,
            "markov_breakpoints": part.breakpoints.tolist(),
            "critical_points": [
                {"point": _enc(c.point), "multiplicity": c.multiplicity, "value": _enc(c.value),
                 "local_degree": c.local_degree}
                for c in crit
            ],
        },
        cfg,
    )


def cmd_circle_conjugacy(args, cfg):
    G = _group_arg(args)
    Fm = FactorCircleMap.from_np(G.n, G.p)
    thetas = np.arange(args.samples) / args.samples
    h, defect = conjugacy_defect(Fm, thetas, args.depth)
    z = np.exp(2j * np.pi * h)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "re", "im", "defect"])
        for t, zz, dd in zip(thetas, z, defect):
            w.writerow([repr(float(t)), repr(float(zz.real)), repr(float(zz.imag)), repr(float(dd))])
    mono = cyclically_monotone(h)
    _emit({"samples": args.samples, "depth": args.depth, "max_defect": float(defect.max()), "monotone": mono,
           "out": args.out}, cfg)
    if not mono:
        raise Failure("conjugacy is not cyclically monotone")


def cmd_bers_build(args, cfg):
    params = json.loads(args.params) if args.params else None
    if params is not None:
        params = [complex(*v) if isinstance(v, list) else complex(v) for v in params]
    R = build(args.family, args.n, args.p, params)
    _emit({"family": args.family, "n": args.n, "p": args.p, **R.to_json()}, cfg, args.out)


def cmd_bers_validate(args, cfg):
    audit = validate_family(_load_map(args.map), args.n, args.p)
    _emit(audit.to_json(), cfg)
    if not audit.ok:
        raise Failure("; ".join(audit.failures))


def cmd_corr_forward(args, cfg, backward=False):
    C = Correspondence(_load_map(args.map))
    z = _point(args.z)
    pts = C.backward(z) if backward else C.forward(z)
    _emit({"z": _enc(z), "direction": "backward" if backward else "forward", "points": [_enc(x) for x in pts]}, cfg)


def cmd_corr_classify(args, cfg):
    C = Correspondence(_load_map(args.map))
    x0, x1, y0, y1, W, H = _floats(args.grid, 6)
    W, H = int(W), int(H)
    labels, ranks = classify_grid(C, (x0, x1, y0, y1), W, H, cfg.max_iter, config=cfg)
    labels.astype(np.uint8).tofile(args.out)
    counts = np.bincount(labels.ravel(), minlength=5)
    side = {"schema": SCHEMA, "config": cfg.to_json(), "grid": [x0, x1, y0, y1, W, H], "dtype": "uint8",
            "order": "row-major, row 0 at y1", "labels": {str(k): v for k, v in LABELS.items()},
            "counts": {LABELS[k]: int(c) for k, c in enumerate(counts)}}
    with open(args.out + ".json", "w") as fh:
        json.dump(side, fh, indent=2)
    _emit({"out": args.out, "counts": side["counts"]}, cfg)


def cmd_corr_cloud(args, cfg):
    C = Correspondence(_load_map(args.map))
    cloud = grand_orbit_cloud(C, args.budget, cfg.seed, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "rank"])
        for z, r in zip(cloud.points, cloud.rank):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), int(r)])
    _emit({"out": args.out, "points": len(cloud)}, cfg)


def cmd_corr_equiv(args, cfg):
    C1 = Correspondence(_load_map(args.map))
    C2 = Correspondence(_load_map(args.other))
    eq = are_equivalent(C1, C2)
    if eq is None:
        _emit({"equivalent": False}, cfg)
        raise Failure("no equivalence found")
    _emit({"equivalent": True, "M": eq.M.to_json(), "M2": eq.M2.to_json(), "ambiguous": eq.ambiguous,
           "candidates": [m.to_json() for m, _ in eq.candidates]}, cfg)


def cmd_normalform(args, cfg):
    res = bp_normalize(_load_map(args.map), args.n)
    _emit(res.to_json(), cfg, args.out)


def cmd_render(args, cfg):
    R = _load_map(args.map)
    W, H = _px(args.px)
    job = RasterJob(R, tuple(_floats(args.view, 4)), W, H, cfg.max_iter, args.palette,
                    "cloud-overlay" if args.what == "overlay" else "classify", args.chart)
    if args.what == "classify":
        raster = render_classification(job, audit=not args.no_audit)
    else:
        cloud = grand_orbit_cloud(Correspondence(R), args.budget, cfg.seed)
        raster = render_cloud(job, cloud) if args.what == "cloud" else render_overlay(job, cloud, not args.no_audit)
    write_ppm(args.out, raster.image)
    _emit({"out": args.out, "width": W, "height": H, "mode": job.mode}, cfg)


def cmd_verify(args, cfg):
    results = run_suites(args.n, args.p, args.suite)
    _emit({"n": args.n, "p": args.p, "suites": [r.to_json() for r in results],
           "ok": all(r.ok for r in results)}, cfg)
    if not all(r.ok for r in results):
        raise Failure("invariant suite failed: " + ", ".join(r.name for r in results if not r.ok))


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corrmate", description="Correspondences mating circle maps with polynomials.")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (default: logical cores)")
    ap.add_argument("--epsilon", type=float, default=DEFAULT.epsilon)
    ap.add_argument("--root-tol", type=float, default=DEFAULT.root_tol)
    ap.add_argument("--max-iter", "--maxiter", dest="max_iter", type=int, default=DEFAULT.max_iter)
    ap.add_argument("--seed", type=int, default=None, help="RNG seed (CORRMATE_SEED if unset)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group").add_subparsers(dest="action", required=True)
    b = g.add_parser("build")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_group_build)

    c = sub.add_parser("circle").add_subparsers(dest="action", required=True)
    for name, func in (("eval", cmd_circle_eval), ("info", cmd_circle_info), ("conjugacy", cmd_circle_conjugacy)):
        q = c.add_parser(name)
        q.add_argument("--group")
        q.add_argument("--n", type=int)
        q.add_argument("--p", type=int)
        q.set_defaults(func=func)
        if name == "eval":
            q.add_argument("--z", required=True)
        elif name == "info":
            q.add_argument("--full-pullback", action="store_true")
        else:
            q.add_argument("--samples", type=int, default=4096)
            q.add_argument("--depth", type=int, default=40)
            q.add_argument("--out", required=True)

    bs = sub.add_parser("bers").add_subparsers(dest="action", required=True)
    q = bs.add_parser("build")
    q.add_argument("--family", choices=["a", "b", "c"], required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--params", help="JSON list of free parameters (numbers or [re, im])")
    q.add_argument("--out")
    q.set_defaults(func=cmd_bers_build)
    q = bs.add_parser("validate")
    q.add_argument("--map", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    q.set_defaults(func=cmd_bers_validate)

    co = sub.add_parser("corr").add_subparsers(dest="action", required=True)
    for name, func in (("forward", cmd_corr_forward),
                       ("backward", lambda a, cfg: cmd_corr_forward(a, cfg, backward=True))):
        q = co.add_parser(name)
        q.add_argument("--map", required=True)
        q.add_argument("--z", required=True)
        q.set_defaults(func=func)
    q = co.add_parser("classify")
    q.add_argument("--map", required=True)
    q.add_argument("--grid", required=True, help="X0,X1,Y0,Y1,W,H")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_corr_classify)
    q = co.add_parser("cloud")
    q.add_argument("--map", required=True)
    q.add_argument("--budget", type=int, required=True)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_corr_cloud)
    q = co.add_parser("equiv")
    q.add_argument("--map", required=True)
    q.add_argument("--other", required=True)
    q.set_defaults(func=cmd_corr_equiv)

    q = sub.add_parser("normalform")
    q.add_argument("--map", required=True)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--out")
    q.set_defaults(func=cmd_normalform)

    q = sub.add_parser("render")
    q.add_argument("what", choices=["classify", "cloud", "overlay"])
    q.add_argument("--map", required=True)
    q.add_argument("--view", default="-2,2,-2,2", help="X0,X1,Y0,Y1")
    q.add_argument("--px", default="512x512", help="WxH")
    q.add_argument("--palette", default="default")
    q.add_argument("--chart", choices=["plane", "reciprocal"], default="plane")
    q.add_argument("--budget", type=int, default=100_000)
    q.add_argument("--no-audit", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_render)

    q = sub.add_parser("verify")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--suite", action="append", help="restrict to named suites")
    q.set_defaults(func=cmd_verify)
    return ap


def _config(args) -> Config:
    cfg = Config(args.epsilon, args.root_tol, args.max_iter, 0)
    if args.seed is not None:
        return replace(cfg, seed=args.seed)
    return cfg.with_env()


VALUE_FLAGS = ("--grid", "--view", "--z")


def _join_values(argv: list[str]) -> list[str]:
    """Let coordinate lists start with a minus sign (``--grid -2,2,...``)."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _join_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = _config(args)
        kernels.set_threads(args.threads or os.cpu_count() or 1)
        args.func(args, cfg)
    except (Failure, AuditError, NormalFormError, ContinuationError, ArithmeticError) as exc:
        print(f"corrmate: failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"corrmate: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
