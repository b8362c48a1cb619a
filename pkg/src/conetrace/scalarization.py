"""Closed-form scalarization values, leveled clipping, and the witness filter.

For a base point ``a``, unit orient ``b`` and sharpness ``eta``, the raw
scalarization value of an image point ``f`` is

    h(f) = <f - a, b> - theta(eta) * sqrt(||f - a||^2 - <f - a, b>^2)

with ``theta(eta) = (1 - eta) / sqrt(eta * (2 - eta))``.  Whenever
``h(f)`` lands strictly between 0 and ``k * eps`` (``eps = r / 3``), the
residual vector ``f - a - h(f) * b`` lies exactly on the cone boundary
``(1 - eta) * ||.|| = <., b>``.  The leveled scalarization clips ``h`` to
``[0, k * eps]`` and the swept value function is

    V^(k) = min((sup_x h(f(x)))^+, k * eps),

approximated by the derivative-free solver.  A parameter cell witnesses
boundary candidates when consecutive levels agree, ``V^(k+1) = V^(k)``
(skipped for untruncated cones, where the sweep instead keeps argmax points
with ``h >= 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import as_point, require_unit

# Default tolerance formulas; both can be overridden by callers.
def default_tol_value(v: float) -> float:
    return 1e-6 * (1.0 + abs(v))


def default_tol_level(k_eps: float) -> float:
    return 1e-7 * (1.0 + k_eps)


@dataclass(frozen=True)
class ScalarizationParams:
    """Base point, orient, cone sharpness, truncation radius, and level."""

    base: np.ndarray
    orient: np.ndarray
    sharpness: float
    radius: float = math.inf
    level: int = 1

    def __post_init__(self):
        base = as_point(self.base, name="base").copy()
        orient = as_point(self.orient, dim=base.shape[0], name="orient").copy()
        require_unit(orient)
        base.setflags(write=False)
        orient.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "orient", orient)
        if not (0.0 < self.sharpness <= 1.0):
            raise ValueError(f"sharpness must be in (0, 1], got {self.sharpness}")
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not (isinstance(self.level, (int, np.integer)) and self.level >= 1):
            raise ValueError(f"level must be a positive integer, got {self.level}")

    @property
    def dim(self) -> int:
        return int(self.base.shape[0])

    @property
    def eps(self) -> float:
        """Shift-step eps = r / 3 (infinite when the cone is untruncated)."""
        return self.radius / 3.0

    def with_level(self, k: int) -> "ScalarizationParams":
        return replace(self, level=k)


@dataclass(frozen=True)
class ScalarValueReport:
    """Outcome of one swept scalarization solve.

    ``argmax_set`` holds (control, image) pairs whose clipped value is within
    tolerance of ``value``; ``h_raw`` is the unclipped supremum and
    ``clipped`` says whether the ``k * eps`` cap was active.
    """

    value: float
    argmax_set: tuple
    clipped: bool
    h_raw: float
    evaluations: int = 0


def theta(eta: float) -> float:
    """Sharpness-to-slope factor (1 - eta) / sqrt(eta * (2 - eta))."""
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    return (1.0 - eta) / math.sqrt(eta * (2.0 - eta))


def h_kernel(diff: np.ndarray, b: np.ndarray, theta_val: float) -> float:
    """Raw scalarization value for a precomputed difference vector.

    The radicand is clipped at zero: Cauchy-Schwarz guarantees it is
    nonnegative analytically but round-off can push it slightly below.
    """
    c = float(np.dot(diff, b))
    sq = float(np.dot(diff, diff)) - c * c
    if sq < 0.0:
        sq = 0.0
    return c - theta_val * math.sqrt(sq)


def h_value(f, p: ScalarizationParams) -> float:
    """Raw scalarization value of an image point under parameters ``p``."""
    fp = as_point(f, dim=p.dim, name="f")
    return h_kernel(fp - p.base, p.orient, theta(p.sharpness))


def phi(f, p: ScalarizationParams) -> float:
    """Leveled scalarization min{max(h, 0), k * eps}."""
    return clip_level(h_value(f, p), p.level, p.eps)


def clip_level(h: float, level: int, eps: float) -> float:
    hplus = h if h > 0.0 else 0.0
    cap = level * eps
    return hplus if hplus <= cap else cap


def _argmax_entries(result, p: ScalarizationParams, value_v: float, tol_value):
    """Collect solver-discovered optima within value tolerance of V.

    Entries are (control, image, h) sorted by descending h then
    lexicographically by control; near-identical controls are merged.
    """
    tol = default_tol_value(value_v) if tol_value is None else tol_value
    entries = []
    for x, hval in result.all_local_optima:
        if clip_level(hval, p.level, p.eps) >= value_v - tol:
            entries.append((np.asarray(x, dtype=float), hval))
    entries.sort(key=lambda e: (-e[1], tuple(e[0])))
    kept = []
    for x, hval in entries:
        if any(np.linalg.norm(x - kx) <= 1e-9 for kx, _ in kept):
            continue
        kept.append((x, hval))
    return kept


def value(problem, p: ScalarizationParams, solver_cfg, tol_value: float | None = None) -> ScalarValueReport:
    """Swept value V^(k) = min((sup_x h)^+, k * eps) with its witnesses."""
    from .solver import maximize

    if problem.dim_image != p.dim:
        raise ValueError(
            f"problem image dimension {problem.dim_image} != parameter dimension {p.dim}"
        )
    th = theta(p.sharpness)
    base, orient = p.base, p.orient

    def objective(x):
        return h_kernel(problem.objective(x) - base, orient, th)

    result = maximize(objective, problem, solver_cfg)
    return report_from_result(problem, result, p, tol_value)


def report_from_result(problem, result, p: ScalarizationParams, tol_value: float | None = None) -> ScalarValueReport:
    """Build a ScalarValueReport at level ``p.level`` from a finished solve.

    The raw supremum does not depend on the level, so one solve serves every
    level; only the clip and the witness tolerance change.
    """
    h_raw = result.best_value
    hplus = h_raw if h_raw > 0.0 else 0.0
    cap = p.level * p.eps
    v = hplus if hplus <= cap else cap
    kept = _argmax_entries(result, p, v, tol_value)
    pairs = tuple((x, np.asarray(problem.objective(x), dtype=float)) for x, _ in kept)
    return ScalarValueReport(
        value=v,
        argmax_set=pairs,
        clipped=hplus > cap,
        h_raw=h_raw,
        evaluations=result.evaluations,
    )


def is_boundary_witness(
    problem,
    p: ScalarizationParams,
    solver_cfg,
    tol_level: float | None = None,
    tol_value: float | None = None,
):
    """Level-stability test V^(k+1) = V^(k) for the cell described by ``p``.

    Returns ``(passed, report_k, report_k_plus_1)``.  With an untruncated
    cone (r = inf) the level test is vacuous: the single report is returned
    twice and the test passes.  The raw supremum is shared between the two
    levels, so a single solve feeds both reports.
    """
    from .solver import maximize

    if not math.isfinite(p.radius):
        rep = value(problem, p, solver_cfg, tol_value)
        return True, rep, rep

    th = theta(p.sharpness)
    base, orient = p.base, p.orient

    def objective(x):
        return h_kernel(problem.objective(x) - base, orient, th)

    result = maximize(objective, problem, solver_cfg)
    rep_k = report_from_result(problem, result, p, tol_value)
    rep_k1 = report_from_result(problem, result, p.with_level(p.level + 1), tol_value)
    tol = default_tol_level(p.level * p.eps) if tol_level is None else tol_level
    passed = abs(rep_k1.value - rep_k.value) <= tol
    return passed, rep_k, rep_k1
