"""Cones, balls, and the membership predicates behind the boundary scan.

The partial order used throughout is induced by a circular ("ice cream")
cone ``{beta : (1 - eta) * ||beta|| <= <beta, orient>}`` with unit axis
``orient`` and sharpness ``eta`` in (0, 1] (half-angle ``arccos(1 - eta)``).
Intersecting with the closed ball of radius ``r`` gives the truncated
(spherical) cone; the partially open variant keeps the ball closed but takes
the open cone interior, which is the shape probed by the exterior-cone
feasibility check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absolute tolerance on all cone inequalities.  Boundary-of-cone points count
# as members of the closed cone and as non-members of the partially open one.
TOL_GEOM = 1e-12

CLOSED = "closed"
PARTIALLY_OPEN = "partially_open"


def as_point(p, dim: int | None = None, name: str = "point") -> np.ndarray:
    """Coerce to a finite 1-d float vector, optionally checking its dimension."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries: {arr!r}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def require_unit(v: np.ndarray, name: str = "orient") -> np.ndarray:
    """Reject non-unit vectors instead of silently normalizing them."""
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > TOL_GEOM:
        raise ValueError(
            f"{name} must be a unit vector, got norm {nrm!r}; "
            "refusing to normalize silently"
        )
    return v


@dataclass(frozen=True)
class ConeSpec:
    """A circular cone, optionally truncated to a closed ball.

    ``interior_mode == "closed"`` is the ordinary closed spherical cone;
    ``"partially_open"`` keeps the ball closed but uses the open cone
    interior (so the origin is never a member).
    """

    orient: np.ndarray
    sharpness: float
    radius: float = math.inf
    interior_mode: str = CLOSED

    def __post_init__(self):
        orient = as_point(self.orient, name="orient")
        require_unit(orient)
        orient = orient.copy()
        orient.setflags(write=False)
        object.__setattr__(self, "orient", orient)
        if not (0.0 < self.sharpness <= 1.0):
            raise ValueError(f"sharpness must be in (0, 1], got {self.sharpness}")
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.interior_mode not in (CLOSED, PARTIALLY_OPEN):
            raise ValueError(f"unknown interior_mode {self.interior_mode!r}")

    @property
    def dim(self) -> int:
        return int(self.orient.shape[0])


def cone_contains(cone: ConeSpec, beta) -> bool:
    """Membership of ``beta`` in the (possibly truncated) cone.

    Closed mode tests ``(1 - eta) * ||beta|| <= <beta, orient>`` and
    ``||beta|| <= r``; the partially open mode makes the cone inequality
    strict while the ball stays closed.  All comparisons use the absolute
    tolerance TOL_GEOM with the convention ``lhs <= rhs + TOL_GEOM`` for
    closed tests.
    """
    b = as_point(beta, dim=cone.dim, name="beta")
    nrm = float(np.linalg.norm(b))
    dot = float(np.dot(b, cone.orient))
    if nrm > cone.radius + TOL_GEOM:
        return False
    lhs = (1.0 - cone.sharpness) * nrm
    if cone.interior_mode == CLOSED:
        return lhs <= dot + TOL_GEOM
    return lhs < dot - TOL_GEOM


def exterior_cone_holds(image_sample, f, cone: ConeSpec) -> bool:
    """Sample-based check that the shifted open cone at ``f`` misses the image.

    Returns True iff no sample point ``g`` satisfies
    ``cone_contains(cone, g - f)``.  This can only falsify, never prove, the
    exterior-cone property: it is a necessary check over the sample at hand.
    """
    if cone.interior_mode != PARTIALLY_OPEN:
        raise ValueError("exterior_cone_holds requires a partially_open cone")
    fp = as_point(f, dim=cone.dim, name="f")
    sample = np.asarray(image_sample, dtype=float)
    if sample.ndim == 1:
        sample = sample.reshape(1, -1)
    if sample.size == 0:
        raise ValueError("image_sample must be nonempty")
    if sample.shape[1] != cone.dim:
        raise ValueError(
            f"image_sample has dimension {sample.shape[1]}, expected {cone.dim}"
        )
    d = sample - fp[None, :]
    nrm = np.linalg.norm(d, axis=1)
    dot = d @ cone.orient
    inside = ((1.0 - cone.sharpness) * nrm < dot - TOL_GEOM)
    if math.isfinite(cone.radius):
        inside &= nrm <= cone.radius + TOL_GEOM
    return not bool(inside.any())


def _fibonacci_sphere(n: int, seed: int) -> np.ndarray:
    """Deterministic Fibonacci lattice on the 2-sphere, azimuth offset by seed."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    offset = 2.0 * math.pi * ((seed * 0.6180339887498949) % 1.0)
    i = np.arange(n, dtype=float)
    z = (2.0 * i + 1.0) / n - 1.0
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    az = i * golden + offset
    pts = np.column_stack([rho * np.cos(az), rho * np.sin(az), z])
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return pts


def unit_sphere_grid(m: int, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic grid of ``n`` unit vectors in R^m.

    For m = 2 the grid is evenly spaced, b_i = (cos(2*pi*i/n), sin(2*pi*i/n))
    for i = 1..n.  For m = 3 a Fibonacci lattice is used; for m >= 4 a
    scrambled Halton sequence is pushed through the Gaussian inverse CDF and
    normalized.  All rows have unit norm within 1e-12.
    """
    if m < 2:
        raise ValueError(f"need image dimension m >= 2, got {m}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if m == 2:
        ang = 2.0 * math.pi * np.arange(1, n + 1, dtype=float) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if m == 3:
        return _fibonacci_sphere(n, seed)
    from scipy.stats import norm, qmc

    halton = qmc.Halton(d=m, scramble=True, seed=seed)
    u = halton.random(n)
    g = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    nrm = np.linalg.norm(g, axis=1)
    nrm[nrm == 0.0] = 1.0
    pts = g / nrm[:, None]
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return pts
