"""Batch driver: sweep the (base, orient, level) grid and verify the output.

The scan walks every orient on the unit sphere grid and every base point of
the configured strategy; for truncated cones it additionally finds the
smallest level at which consecutive-level values agree.  Witness images of
passing cells are deduplicated into a boundary cloud and written as CSV
(byte-stable: 17 significant digits, rows fully sorted) plus a JSON report
with per-cell diagnostics.  ``verify`` compares the cloud against the
occupancy-grid oracle through directed Hausdorff distances.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .geometry import ConeSpec, PARTIALLY_OPEN, exterior_cone_holds, unit_sphere_grid
from .oracle import BoundaryCloud, BoundaryPoint, dedup_points
from .problems import BUILTINS, load_problem
from .reduction import (
    ComponentBounds,
    InfeasibleBox,
    component_bounds,
    default_pivot,
    parameter_range,
    parameter_range_intersection,
    sample_param_grid,
)
from .scalarization import (
    ScalarizationParams,
    default_tol_level,
    default_tol_value,
    h_kernel,
    theta,
)
from .solver import DIRECT_MULTISTART, SolverConfig, SolverError, maximize


class ConfigError(ValueError):
    """Invalid scan configuration (CLI exit code 2)."""


# --- configuration ---------------------------------------------------------

def _check_keys(section: dict, allowed, required, path: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{path} must be a mapping")
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {sorted(unknown)}")
    missing = set(required) - set(section)
    if missing:
        raise ConfigError(f"missing keys in {path}: {sorted(missing)}")


def _positive(value, path, kind=float):
    try:
        v = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a {kind.__name__}") from None
    if v <= 0:
        raise ConfigError(f"{path} must be positive, got {value!r}")
    return v


_BASE_KEYS = {
    "reduced": {"strategy", "iota", "counts", "mode", "lower", "upper",
                "bounds_samples", "bounds_seed"},
    "reduced_multi": {"strategy", "pivots", "counts", "lower", "upper",
                      "bounds_samples", "bounds_seed"},
    "explicit": {"strategy", "points"},
    "box": {"strategy", "lower", "upper", "counts"},
}


def validate_config(raw: dict) -> dict:
    """Validate the scan config mapping; unknown keys are errors."""
    _check_keys(raw, {"problem", "cone", "sweep", "solver", "tolerances", "output"},
                {"problem", "cone", "sweep"}, "config")

    cone = raw["cone"]
    _check_keys(cone, {"eta", "r"}, {"eta", "r"}, "cone")
    eta = float(cone["eta"])
    if not 0.0 < eta <= 1.0:
        raise ConfigError(f"cone.eta must be in (0, 1], got {eta}")
    r = cone["r"]
    radius = math.inf if r == "inf" else _positive(r, "cone.r")

    sweep = raw["sweep"]
    _check_keys(sweep, {"orient_count", "orient_seed", "base", "k_max"},
                {"orient_count", "base"}, "sweep")
    n_b = int(sweep["orient_count"])
    if n_b < 1:
        raise ConfigError("sweep.orient_count must be >= 1")
    base = sweep["base"]
    if not isinstance(base, dict) or "strategy" not in base:
        raise ConfigError("sweep.base must be a mapping with a 'strategy' key")
    strategy = base["strategy"]
    if strategy not in _BASE_KEYS:
        raise ConfigError(
            f"unknown base strategy {strategy!r}; "
            f"choose from {sorted(_BASE_KEYS)}"
        )
    _check_keys(base, _BASE_KEYS[strategy], {"strategy"}, "sweep.base")
    if strategy == "reduced" and base.get("mode", "per_orient") not in ("per_orient", "superset"):
        raise ConfigError("sweep.base.mode must be 'per_orient' or 'superset'")
    if strategy == "explicit" and not base.get("points"):
        raise ConfigError("sweep.base.points must be a nonempty list")
    k_max = sweep.get("k_max", "auto")
    if k_max != "auto":
        k_max = int(k_max)
        if k_max < 1:
            raise ConfigError("sweep.k_max must be >= 1 or 'auto'")

    solver = dict(raw.get("solver", {}))
    _check_keys(solver, {"n_starts", "budget", "local_tol", "seed", "method"}, (), "solver")
    solver.setdefault("n_starts", 12)
    solver.setdefault("budget", int(solver["n_starts"]) * 250)
    solver.setdefault("local_tol", 1e-9)
    solver.setdefault("seed", 0)
    solver.setdefault("method", DIRECT_MULTISTART)
    if solver["method"] != DIRECT_MULTISTART:
        raise ConfigError(
            "scan requires solver.method = 'direct_multistart' "
            "(the two-stage method reports values, not witness sets)"
        )

    tol = dict(raw.get("tolerances", {}))
    _check_keys(tol, {"tol_level", "tol_value", "dedup_eps"}, (), "tolerances")
    tol.setdefault("tol_level", None)
    tol.setdefault("tol_value", None)
    tol.setdefault("dedup_eps", 0.0)

    out = dict(raw.get("output", {}))
    _check_keys(out, {"dir", "csv", "json"}, (), "output")
    out.setdefault("dir", ".")
    out.setdefault("csv", "boundary.csv")
    out.setdefault("json", "boundary.json")

    cfg = {
        "problem": raw["problem"],
        "cone": {"eta": eta, "r": "inf" if math.isinf(radius) else float(radius)},
        "sweep": {
            "orient_count": n_b,
            "orient_seed": int(sweep.get("orient_seed", 0)),
            "base": base,
            "k_max": k_max,
        },
        "solver": solver,
        "tolerances": tol,
        "output": out,
    }
    # The problem spec is validated by constructing it once.
    try:
        load_problem(cfg["problem"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return validate_config(raw)


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def apply_overrides(cfg: dict, seed=None, output_dir=None) -> dict:
    cfg = json.loads(json.dumps(cfg))
    if seed is not None:
        cfg["solver"]["seed"] = int(seed)
        cfg["sweep"]["orient_seed"] = int(seed) + 1
        if "bounds_seed" in _BASE_KEYS.get(cfg["sweep"]["base"]["strategy"], ()):
            cfg["sweep"]["base"]["bounds_seed"] = int(seed) + 2
    if output_dir is not None:
        cfg["output"]["dir"] = str(output_dir)
    return cfg


# --- base-point strategies -------------------------------------------------

def _bounds_for(cfg: dict, problem) -> ComponentBounds:
    base = cfg["sweep"]["base"]
    if base.get("lower") is not None and base.get("upper") is not None:
        return ComponentBounds(
            lower=np.asarray(base["lower"], dtype=float),
            upper=np.asarray(base["upper"], dtype=float),
            source="analytic",
        )
    if problem.analytic_lower is not None and problem.analytic_upper is not None:
        return ComponentBounds(problem.analytic_lower, problem.analytic_upper,
                               source="analytic")
    return component_bounds(
        problem,
        int(base.get("bounds_samples", 20000)),
        int(base.get("bounds_seed", 0)),
    )


def _superset_box(bounds: ComponentBounds, b: np.ndarray, pivot: int):
    """Orient-independent envelope of the per-orient reduced boxes.

    Every per-orient interval for a free coordinate i is contained in
    [lower_i - M, upper_i + M] with M = max(|lower_p|, |upper_p|); the pivot
    coordinate still follows the orient-sign rule.
    """
    from .reduction import ParamBox

    m = bounds.dim
    big = max(abs(float(bounds.lower[pivot])), abs(float(bounds.upper[pivot])))
    fixed = {pivot: float(bounds.lower[pivot] if b[pivot] >= 0.0 else bounds.upper[pivot])}
    ranges = {
        i: (float(bounds.lower[i]) - big, float(bounds.upper[i]) + big)
        for i in range(m)
        if i != pivot
    }
    return ParamBox(fixed=fixed, ranges=ranges)


def base_points_for_orient(cfg: dict, problem, bounds, b: np.ndarray):
    """Base points swept for one orient, per the configured strategy."""
    base = cfg["sweep"]["base"]
    strategy = base["strategy"]
    if strategy == "explicit":
        return [np.asarray(p, dtype=float) for p in base["points"]]
    if strategy == "box":
        from .reduction import ParamBox

        lower = np.asarray(base["lower"], dtype=float)
        upper = np.asarray(base["upper"], dtype=float)
        box = ParamBox(fixed={}, ranges={i: (float(lower[i]), float(upper[i]))
                                         for i in range(lower.shape[0])})
        return list(sample_param_grid(box, base["counts"]))
    if strategy == "reduced":
        pivot = int(base["iota"]) - 1 if "iota" in base else default_pivot(bounds)
        if base.get("mode", "per_orient") == "superset":
            box = _superset_box(bounds, b, pivot)
        else:
            box = parameter_range(bounds, b, pivot)
        return list(sample_param_grid(box, base["counts"]))
    # reduced_multi
    pivots = [int(p) - 1 for p in base["pivots"]]
    box = parameter_range_intersection(bounds, b, pivots)
    if isinstance(box, InfeasibleBox):
        return box
    return list(sample_param_grid(box, base["counts"]))


def resolve_k_max(cfg: dict, problem, bounds, radius: float, all_bases) -> int:
    """k_max 'auto' = ceil(3 * (diameter estimate + base offset) / r)."""
    k_max = cfg["sweep"]["k_max"]
    if k_max != "auto":
        return int(k_max)
    if math.isinf(radius):
        return 1
    lo, hi = bounds.lower, bounds.upper
    diam = float(np.linalg.norm(hi - lo))
    centroid = 0.5 * (lo + hi)
    offset = 0.0
    for a in all_bases:
        offset = max(offset, float(np.linalg.norm(a - centroid)))
    return max(1, int(math.ceil(3.0 * (diam + offset) / radius)))


# --- one sweep cell --------------------------------------------------------

def run_cell(problem, eta: float, radius: float, b, a, k_max: int,
             solver_cfg: SolverConfig, tol_level, tol_value):
    """Solve one (base, orient) cell and collect its witnesses.

    The raw supremum of h is level-independent, so a single solve yields the
    value at every level; the level scan only inspects the clip.  Returns
    (points, diagnostics).
    """
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    th = theta(eta)
    diag = {"a": a.tolist(), "b": b.tolist(), "passed": False, "k": None,
            "h_raw": None, "V": None, "clipped": False, "n_witnesses": 0,
            "evaluations": 0, "error": None}

    def objective(x):
        return h_kernel(problem.objective(x) - a, b, th)

    try:
        result = maximize(objective, problem, solver_cfg)
    except SolverError as exc:
        diag["error"] = str(exc)
        return [], diag

    h_raw = result.best_value
    hplus = max(h_raw, 0.0)
    diag["h_raw"] = h_raw
    diag["evaluations"] = result.evaluations

    from .scalarization import _argmax_entries

    if math.isinf(radius):
        v = hplus
        tol_v = default_tol_value(v) if tol_value is None else tol_value
        params = ScalarizationParams(base=a, orient=b, sharpness=eta,
                                     radius=radius, level=1)
        entries = _argmax_entries(result, params, v, tol_value)
        # Untruncated cones keep only nonnegative raw values (no level test).
        entries = [(x, hv) for x, hv in entries if hv >= -tol_v]
        k_used, clipped = 1, False
    else:
        eps = radius / 3.0
        k_used = None
        for k in range(1, k_max + 1):
            tol_l = default_tol_level(k * eps) if tol_level is None else tol_level
            v_k = min(hplus, k * eps)
            v_k1 = min(hplus, (k + 1) * eps)
            if abs(v_k1 - v_k) <= tol_l:
                k_used = k
                break
        if k_used is None:
            diag["clipped"] = True
            return [], diag
        v = min(hplus, k_used * eps)
        clipped = hplus > k_used * eps
        params = ScalarizationParams(base=a, orient=b, sharpness=eta,
                                     radius=radius, level=k_used)
        entries = _argmax_entries(result, params, v, tol_value)

    points = [
        BoundaryPoint(
            image=np.asarray(problem.objective(x), dtype=float),
            control=x,
            base=a,
            orient=b,
            level=k_used,
            value=v,
            h=hv,
        )
        for x, hv in entries
    ]
    diag.update(passed=bool(points), k=k_used, V=v, clipped=clipped,
                n_witnesses=len(points))
    return points, diag


# --- full scan -------------------------------------------------------------

_WORKER_CACHE: dict = {}


def _worker_state(cfg_blob: str):
    state = _WORKER_CACHE.get(cfg_blob)
    if state is None:
        cfg = json.loads(cfg_blob)
        problem = load_problem(cfg["problem"])
        strategy = cfg["sweep"]["base"]["strategy"]
        bounds = (
            _bounds_for(cfg, problem)
            if strategy in ("reduced", "reduced_multi")
            else None
        )
        orients = unit_sphere_grid(problem.dim_image,
                                   cfg["sweep"]["orient_count"],
                                   cfg["sweep"]["orient_seed"])
        state = {"cfg": cfg, "problem": problem, "bounds": bounds,
                 "orients": orients, "bases": {}}
        _WORKER_CACHE[cfg_blob] = state
    return state


def _bases_for(state, ib: int):
    if ib not in state["bases"]:
        state["bases"][ib] = base_points_for_orient(
            state["cfg"], state["problem"], state["bounds"], state["orients"][ib]
        )
    return state["bases"][ib]


def _cell_worker(payload):
    cfg_blob, ib, ia, k_max = payload
    state = _worker_state(cfg_blob)
    cfg = state["cfg"]
    radius = math.inf if cfg["cone"]["r"] == "inf" else float(cfg["cone"]["r"])
    bases = _bases_for(state, ib)
    solver_cfg = SolverConfig(**cfg["solver"])
    points, diag = run_cell(
        state["problem"], cfg["cone"]["eta"], radius,
        state["orients"][ib], bases[ia], k_max, solver_cfg,
        cfg["tolerances"]["tol_level"], cfg["tolerances"]["tol_value"],
    )
    return ib, ia, points, diag


def run_scan(cfg: dict, threads: int = 1, progress=None):
    """Execute the sweep; returns (BoundaryCloud, report dict)."""
    cfg_blob = json.dumps(cfg, sort_keys=True)
    state = _worker_state(cfg_blob)
    problem = state["problem"]
    orients = state["orients"]
    radius = math.inf if cfg["cone"]["r"] == "inf" else float(cfg["cone"]["r"])

    cells = []
    skipped = []
    all_bases = []
    for ib in range(len(orients)):
        bases = _bases_for(state, ib)
        if isinstance(bases, InfeasibleBox):
            skipped.append({"orient_index": ib, "reason": bases.reason})
            continue
        for ia, a in enumerate(bases):
            cells.append((ib, ia))
            all_bases.append(a)
    k_max = 1
    if not math.isinf(radius):
        bounds = state["bounds"]
        if bounds is None and cfg["sweep"]["k_max"] == "auto":
            if problem.analytic_lower is not None and problem.analytic_upper is not None:
                bounds = ComponentBounds(problem.analytic_lower,
                                         problem.analytic_upper, source="analytic")
            else:
                bounds = component_bounds(problem, 20000, 0)
        k_max = resolve_k_max(cfg, problem, bounds, radius, all_bases)

    results = {}
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(_cell_worker, (cfg_blob, ib, ia, k_max)): (ib, ia)
                for ib, ia in cells
            }
            for fut in concurrent.futures.as_completed(futures):
                ib, ia, points, diag = fut.result()
                results[(ib, ia)] = (points, diag)
    else:
        solver_cfg = SolverConfig(**cfg["solver"])
        for ib, ia in cells:
            bases = _bases_for(state, ib)
            points, diag = run_cell(
                problem, cfg["cone"]["eta"], radius, orients[ib], bases[ia],
                k_max, solver_cfg,
                cfg["tolerances"]["tol_level"], cfg["tolerances"]["tol_value"],
            )
            results[(ib, ia)] = (points, diag)
            if progress is not None:
                progress(len(results), len(cells))

    candidates = []
    diagnostics = []
    failures = 0
    total_evals = 0
    passed = 0
    for ib, ia in cells:  # deterministic aggregation order
        points, diag = results[(ib, ia)]
        diag = {"orient_index": ib, "base_index": ia} | diag
        diagnostics.append(diag)
        total_evals += diag["evaluations"]
        if diag["error"] is not None:
            failures += 1
        if diag["passed"]:
            passed += 1
        candidates.extend(points)

    kept = dedup_points(candidates, float(cfg["tolerances"]["dedup_eps"]))
    kept.sort(key=lambda p: (tuple(p.image), tuple(p.base), tuple(p.orient),
                             tuple(p.control), p.level))
    cloud = BoundaryCloud(points=tuple(kept), problem_name=problem.name,
                          config_digest=config_digest(cfg))
    report = {
        "schema": "conetrace.scan.v1",
        "problem": problem.name,
        "config_digest": cloud.config_digest,
        "k_max": k_max,
        "n_cells": len(cells),
        "cells_passed": passed,
        "cells_failed": failures,
        "orients_skipped": skipped,
        "n_candidates": len(candidates),
        "n_points": len(kept),
        "solver_stats": {
            "total_evaluations": total_evals,
            "method": cfg["solver"]["method"],
            "n_starts": cfg["solver"]["n_starts"],
        },
        "cells": diagnostics,
    }
    return cloud, report


# --- output ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, cloud: BoundaryCloud, dim_image: int, dim_control: int):
    cols = (
        [f"f_{i + 1}" for i in range(dim_image)]
        + [f"x_{i + 1}" for i in range(dim_control)]
        + ["k", "V"]
        + [f"a_{i + 1}" for i in range(dim_image)]
        + [f"b_{i + 1}" for i in range(dim_image)]
    )
    lines = [",".join(cols)]
    for p in cloud.points:
        row = (
            [_fmt(v) for v in p.image]
            + [_fmt(v) for v in p.control]
            + [str(int(p.level)), _fmt(p.value)]
            + [_fmt(v) for v in p.base]
            + [_fmt(v) for v in p.orient]
        )
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path, cloud: BoundaryCloud, report: dict, cfg: dict):
    payload = dict(report)
    payload["config"] = cfg
    payload["points"] = [
        {
            "f": p.image.tolist(),
            "x": p.control.tolist(),
            "a": p.base.tolist(),
            "b": p.orient.tolist(),
            "k": int(p.level),
            "V": float(p.value),
            "h": float(p.h),
        }
        for p in cloud.points
    ]
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


def read_cloud_csv(path) -> np.ndarray:
    """Image points from a scan CSV (f_* columns)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        m = sum(1 for c in header if c.startswith("f_"))
        rows = [line.strip().split(",")[:m] for line in fh if line.strip()]
    if not rows:
        return np.empty((0, m))
    return np.array(rows, dtype=float)


# --- verify ----------------------------------------------------------------

def run_verify(cfg: dict, n: int, h: float, delta_sound: float,
               delta_cover: float, seed: int = 0, threads: int = 1):
    problem = load_problem(cfg["problem"])
    out_dir = Path(cfg["output"]["dir"])
    csv_path = out_dir / cfg["output"]["csv"]
    if csv_path.exists():
        cloud_images = read_cloud_csv(csv_path)
    else:
        cloud, report = run_scan(cfg, threads=threads)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(csv_path, cloud, problem.dim_image, problem.dim_control)
        write_json(out_dir / cfg["output"]["json"], cloud, report, cfg)
        cloud_images = cloud.images()

    oracle_pts = oracle_mod.occupancy_boundary(
        oracle_mod.image_cloud(problem, n, seed), h
    )
    report = {
        "schema": "conetrace.verify.v1",
        "problem": problem.name,
        "config_digest": config_digest(cfg),
        "oracle": {"n_samples": int(n), "cell": float(h),
                   "n_boundary_cells": int(oracle_pts.shape[0]), "seed": int(seed)},
        "delta_sound": float(delta_sound),
        "delta_cover": float(delta_cover),
    }
    if cloud_images.shape[0] == 0:
        report.update(
            n_points=0,
            d_cloud_to_oracle=None,
            d_oracle_to_cloud=math.inf,
            sym=math.inf,
            pass_sound=True,
            pass_cover=False,
            passed=False,
            offenders_sound=[],
            offenders_cover=[],
        )
        return report

    d_sound = oracle_mod.nearest_distances(cloud_images, oracle_pts)
    d_cover = oracle_mod.nearest_distances(oracle_pts, cloud_images)

    def offenders(points, dist, k=5):
        order = np.argsort(-dist, kind="stable")[:k]
        return [
            {"point": points[i].tolist(), "distance": float(dist[i])}
            for i in order
            if dist[i] > 0
        ]

    pass_sound = bool(d_sound.max() <= delta_sound)
    pass_cover = bool(d_cover.max() <= delta_cover)
    report.update(
        n_points=int(cloud_images.shape[0]),
        d_cloud_to_oracle=float(d_sound.max()),
        d_oracle_to_cloud=float(d_cover.max()),
        sym=float(max(d_sound.max(), d_cover.max())),
        pass_sound=pass_sound,
        pass_cover=pass_cover,
        passed=pass_sound and pass_cover,
        offenders_sound=offenders(cloud_images, d_sound),
        offenders_cover=offenders(oracle_pts, d_cover),
    )
    return report


# --- entry points ----------------------------------------------------------

def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, seed=args.seed, output_dir=args.output_dir)
    problem = load_problem(cfg["problem"])
    cloud, report = run_scan(cfg, threads=args.threads)
    out_dir = Path(cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / cfg["output"]["csv"], cloud, problem.dim_image,
              problem.dim_control)
    write_json(out_dir / cfg["output"]["json"], cloud, report, cfg)
    print(
        f"scan: {report['n_points']} boundary points from "
        f"{report['cells_passed']}/{report['n_cells']} passing cells "
        f"({report['solver_stats']['total_evaluations']} evaluations)"
    )
    if report["cells_failed"]:
        print(f"warning: {report['cells_failed']} cells failed to solve",
              file=sys.stderr)
        if args.strict:
            return 1
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, seed=args.seed, output_dir=args.output_dir)
    report = run_verify(cfg, n=args.n, h=args.h, delta_sound=args.delta_sound,
                        delta_cover=args.delta_cover,
                        seed=args.seed if args.seed is not None else 0,
                        threads=args.threads)
    out_dir = Path(cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "verify_report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        "verify: cloud->oracle {s}, oracle->cloud {c} "
        "(delta_sound={ds}, delta_cover={dc}) -> {verdict}".format(
            s=report["d_cloud_to_oracle"],
            c=report["d_oracle_to_cloud"],
            ds=report["delta_sound"],
            dc=report["delta_cover"],
            verdict="PASS" if report["passed"] else "FAIL",
        )
    )
    return 0 if report["passed"] else 1


def cmd_problems(args) -> int:
    if args.action != "list":
        print("usage: conetrace problems list", file=sys.stderr)
        return 2
    for name in BUILTINS:
        spec = {"builtin": name}
        if name == "disk":
            spec["radius"] = 1.0
        elif name == "annulus":
            spec.update(r_in=1.0, r_out=2.0)
        elif name == "polygon":
            spec["vertices"] = [[0, 0], [1, 0], [1, 1], [0, 1]]
        p = load_problem(spec)
        r = "inf" if math.isinf(p.recommended_radius) else f"{p.recommended_radius:g}"
        print(
            f"{name:14s} d={p.dim_control} m={p.dim_image} "
            f"eta={p.recommended_eta:.6g} r={r}"
        )
    return 0


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"cannot parse vector {text!r}; expected comma floats") from None


def cmd_check_cone(args) -> int:
    cfg = load_config(args.config)
    problem = load_problem(cfg["problem"])
    at = _parse_vector(args.at)
    nu = _parse_vector(args.nu)
    nrm = float(np.linalg.norm(nu))
    if nrm == 0.0:
        raise ConfigError("--nu must be nonzero")
    if abs(nrm - 1.0) > 1e-12:
        print(f"note: normalizing --nu by {nrm:.17g}")
        nu = nu / nrm
    radius = math.inf if cfg["cone"]["r"] == "inf" else float(cfg["cone"]["r"])
    cone = ConeSpec(orient=nu, sharpness=cfg["cone"]["eta"], radius=radius,
                    interior_mode=PARTIALLY_OPEN)
    sample = oracle_mod.image_cloud(problem, args.n,
                                    args.seed if args.seed is not None else 0)
    holds = exterior_cone_holds(sample, at, cone)
    print(f"exterior cone at {at.tolist()} along {nu.tolist()}: "
          f"{'holds' if holds else 'violated'} over {args.n} samples")
    return 0 if holds else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conetrace",
        description="Boundary tracing via spherical-cone scalarization sweeps",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="override solver/orient/bounds seeds")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweep cells")
    common.add_argument("--strict", action="store_true",
                        help="fail on any cell solve error")
    common.add_argument("--output-dir", default=None,
                        help="override output directory")

    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", parents=[common], help="run a boundary sweep")
    p_scan.add_argument("config")
    p_scan.set_defaults(func=cmd_scan)

    p_ver = sub.add_parser("verify", parents=[common],
                           help="compare a sweep against the geometric oracle")
    p_ver.add_argument("config")
    p_ver.add_argument("--n", type=int, default=200000,
                       help="oracle sample count")
    p_ver.add_argument("--h", type=float, default=0.02, help="oracle cell size")
    p_ver.add_argument("--delta-sound", type=float, default=0.05)
    p_ver.add_argument("--delta-cover", type=float, default=0.15)
    p_ver.set_defaults(func=cmd_verify)

    p_prob = sub.add_parser("problems", parents=[common],
                            help="inspect built-in problems")
    p_prob.add_argument("action", choices=["list"])
    p_prob.set_defaults(func=cmd_problems)

    p_cone = sub.add_parser("check-cone", parents=[common],
                            help="probe the exterior-cone condition at a point")
    p_cone.add_argument("config")
    p_cone.add_argument("--at", required=True, help="image point, comma floats")
    p_cone.add_argument("--nu", required=True, help="cone orient, comma floats")
    p_cone.add_argument("--n", type=int, default=100000,
                        help="image sample count")
    p_cone.set_defaults(func=cmd_check_cone)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
