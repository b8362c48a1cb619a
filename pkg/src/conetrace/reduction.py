"""Pivot-reduced base-point boxes for bounded image sets.

For a bounded image with componentwise bounds [lower_i, upper_i], fixing one
pivot coordinate of the base point at a bound (which bound depends on the
sign of the orient's pivot component) and restricting the remaining
coordinates to cross-corrected intervals recovers the same boundary as
sweeping bases over all of R^m.  Several pivots can be fixed at once when
the bound geometry allows the per-pivot boxes to intersect.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import as_point, require_unit


@dataclass(frozen=True)
class ComponentBounds:
    """Componentwise lower/upper bounds of the image set."""

    lower: np.ndarray
    upper: np.ndarray
    source: str = "analytic"

    def __post_init__(self):
        lower = as_point(self.lower, name="lower").copy()
        upper = as_point(self.upper, dim=lower.shape[0], name="upper").copy()
        if np.any(lower > upper):
            raise ValueError("lower bounds exceed upper bounds")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return int(self.lower.shape[0])


@dataclass(frozen=True)
class ParamBox:
    """A base-point box: some coordinates fixed, the rest on closed intervals."""

    fixed: dict
    ranges: dict

    def __post_init__(self):
        m = len(self.fixed) + len(self.ranges)
        seen = set(self.fixed) | set(self.ranges)
        if seen != set(range(m)):
            raise ValueError("fixed and free coordinates must partition 0..m-1")
        for i, (lo, hi) in self.ranges.items():
            if not lo <= hi:
                raise ValueError(f"empty interval for coordinate {i}: [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.fixed) + len(self.ranges)

    @property
    def free(self) -> list:
        return sorted(self.ranges)


@dataclass(frozen=True)
class InfeasibleBox:
    """Marker naming the feasibility condition a multi-pivot box violated."""

    reason: str


def component_bounds(problem, n_samples: int, seed: int = 0, margin: float = 0.01) -> ComponentBounds:
    """Sampled componentwise bounds, widened by ``margin`` of each range.

    The widening guards against under-estimated extremes: sampled bounds must
    enclose the true ones for the reduced boxes to stay sufficient.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    xs = problem.sample(n_samples, seed)
    if xs.shape[0] == 0:
        raise ValueError("no feasible sample found")
    fs = problem.evaluate(xs)
    lo = fs.min(axis=0)
    hi = fs.max(axis=0)
    width = hi - lo
    return ComponentBounds(
        lower=lo - margin * width,
        upper=hi + margin * width,
        source=f"sampled({n_samples})",
    )


def _free_interval(bounds: ComponentBounds, b: np.ndarray, pivot: int, i: int):
    """Interval for free coordinate ``i`` of the single-pivot box."""
    p1 = abs(float(bounds.lower[pivot])) * float(b[i])
    p2 = abs(float(bounds.upper[pivot])) * float(b[i])
    return float(bounds.lower[i]) - max(p1, p2), float(bounds.upper[i]) - min(p1, p2)


def _pivot_value(bounds: ComponentBounds, b: np.ndarray, pivot: int) -> float:
    return float(bounds.lower[pivot] if b[pivot] >= 0.0 else bounds.upper[pivot])


def parameter_range(bounds: ComponentBounds, b, pivot: int) -> ParamBox:
    """Single-pivot base box: pivot fixed at a bound, others on intervals.

    ``pivot`` is a 0-based coordinate index.  The pivot coordinate is fixed
    at the lower bound when the orient's pivot component is nonnegative and
    at the upper bound otherwise; every other coordinate gets the interval
    [lower_i - max(|lower_p| b_i, |upper_p| b_i),
     upper_i - min(|lower_p| b_i, |upper_p| b_i)].
    """
    m = bounds.dim
    if m < 2:
        raise ValueError("reduction requires image dimension m >= 2")
    if not 0 <= pivot < m:
        raise ValueError(f"pivot {pivot} out of range for dimension {m}")
    bv = as_point(b, dim=m, name="b")
    require_unit(bv, name="b")
    fixed = {pivot: _pivot_value(bounds, bv, pivot)}
    ranges = {i: _free_interval(bounds, bv, pivot, i) for i in range(m) if i != pivot}
    return ParamBox(fixed=fixed, ranges=ranges)


def parameter_range_intersection(bounds: ComponentBounds, b, pivots) -> ParamBox | InfeasibleBox:
    """Multi-pivot base box, or an infeasibility marker naming the failure.

    Two feasibility conditions are checked: for every ordered pivot pair
    (p, q), both bounds of coordinate p must lie inside the q-interval of
    the p-pivot box; and for every free coordinate the per-pivot intervals
    must intersect.  The checks follow the stated bound arithmetic with
    absolute values on the pivot bounds (the looser of the two published
    variants; see the module docs).
    """
    m = bounds.dim
    pivots = sorted(set(int(p) for p in pivots))
    if len(pivots) < 2:
        raise ValueError("need at least two pivot coordinates")
    if any(not 0 <= p < m for p in pivots):
        raise ValueError(f"pivot out of range for dimension {m}")
    bv = as_point(b, dim=m, name="b")
    require_unit(bv, name="b")

    for p, q in itertools.permutations(pivots, 2):
        lo, hi = _free_interval(bounds, bv, p, q)
        for val, tag in ((float(bounds.lower[p]), "lower"), (float(bounds.upper[p]), "upper")):
            if not lo <= val <= hi:
                return InfeasibleBox(
                    reason=(
                        f"pivot-bound condition failed: {tag} bound {val} of "
                        f"coordinate {p} outside coordinate-{q} interval "
                        f"[{lo}, {hi}]"
                    )
                )

    fixed = {p: _pivot_value(bounds, bv, p) for p in pivots}
    ranges = {}
    for i in range(m):
        if i in fixed:
            continue
        los, his = zip(*(_free_interval(bounds, bv, p, i) for p in pivots))
        lo, hi = max(los), min(his)
        if lo > hi:
            return InfeasibleBox(
                reason=(
                    f"interval-intersection condition failed: coordinate {i} "
                    f"intervals have empty intersection [{lo}, {hi}]"
                )
            )
        ranges[i] = (lo, hi)
    return ParamBox(fixed=fixed, ranges=ranges)


def default_pivot(bounds: ComponentBounds) -> int:
    """Coordinate with the smallest sampled range (cheapest fixed dimension)."""
    return int(np.argmin(bounds.upper - bounds.lower))


def sample_param_grid(box: ParamBox, counts) -> np.ndarray:
    """Uniform grid over the free coordinates of a base box.

    ``counts`` is one int per free coordinate (ascending index order) or a
    single int for all.  Endpoints are included; a count of 1 yields the
    midpoint.  Points come out in odometer order, last free coordinate
    fastest.
    """
    free = box.free
    if isinstance(counts, (int, np.integer)):
        counts = [int(counts)] * len(free)
    counts = [int(c) for c in counts]
    if len(counts) != len(free):
        raise ValueError(f"need {len(free)} counts, got {len(counts)}")
    if any(c < 1 for c in counts):
        raise ValueError("counts must be >= 1")
    axes = []
    for i, c in zip(free, counts):
        lo, hi = box.ranges[i]
        axes.append(np.array([0.5 * (lo + hi)]) if c == 1 else np.linspace(lo, hi, c))
    points = []
    for combo in itertools.product(*axes):
        a = np.empty(box.dim)
        for i, v in box.fixed.items():
            a[i] = v
        for i, v in zip(free, combo):
            a[i] = v
        points.append(a)
    return np.array(points) if points else np.empty((0, box.dim))
