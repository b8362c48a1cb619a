"""Function-space variants of the scalarization value.

Orthonormal-coefficient truncations of square-integrable functions reuse the
finite-dimensional formula verbatim (`l2_h_value`).  For bounded continuous
functions the orient is a density ``c * b`` against Lebesgue measure, scaled
so the induced pairing has unit slope (``c = 1 / integral(b^2)``), and the
scalarization value solves the transcendental equation

    c * integral((f - a - y*b) * b) = (1 - eta) * max_i |f_i - a_i - y*b_i|

whose left side is linear with slope -1 and whose right side is
(1 - eta)-Lipschitz, so the root is unique and bracketing bisection is
guaranteed to find it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import require_unit
from .scalarization import h_kernel, theta


@dataclass(frozen=True)
class GridFunction:
    """A function sampled on quadrature nodes with positive weights."""

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        values = np.asarray(self.values, dtype=float)
        n = weights.shape[0]
        if weights.ndim != 1 or values.shape != (n,) or nodes.shape[0] != n:
            raise ValueError("nodes, weights and values must share length")
        if not np.all(weights > 0.0):
            raise ValueError("quadrature weights must be positive")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(weights))):
            raise ValueError("grid function has non-finite entries")
        for arr, name in ((nodes, "nodes"), (weights, "weights"), (values, "values")):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int, fn) -> "GridFunction":
        """Sample ``fn`` on n uniform nodes of [lo, hi] with trapezoid weights."""
        if n < 2:
            raise ValueError("uniform grid needs n >= 2")
        nodes = np.linspace(lo, hi, n)
        h = (hi - lo) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
        values = np.array([fn(t) for t in nodes], dtype=float)
        return cls(nodes=nodes, weights=weights, values=values)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.weights.shape == other.weights.shape
            and np.allclose(self.nodes, other.nodes, atol=1e-12, rtol=0.0)
            and np.allclose(self.weights, other.weights, atol=1e-12, rtol=0.0)
        )


def l2_h_value(f_coeffs, a_coeffs, b_coeffs, eta: float) -> float:
    """Scalarization value on truncated orthonormal coefficients.

    Identical formula to the finite-dimensional ``h_value`` applied to the
    coefficient vectors; ``b_coeffs`` must have unit Euclidean norm.
    """
    f = np.asarray(f_coeffs, dtype=float)
    a = np.asarray(a_coeffs, dtype=float)
    b = np.asarray(b_coeffs, dtype=float)
    if not (f.shape == a.shape == b.shape and f.ndim == 1):
        raise ValueError("coefficient vectors must share one dimension")
    require_unit(b, name="b_coeffs")
    return h_kernel(f - a, b, theta(eta))


def cb_scaling_factor(b: GridFunction) -> float:
    """Density scale c = 1 / integral(b^2) for a sup-normalized orient.

    Requires ``max |b| = 1`` within 1e-9; the induced measure then has
    total-variation norm ``c * integral(|b|) >= 1`` up to quadrature error.
    """
    sup = float(np.max(np.abs(b.values)))
    if sup == 0.0:
        raise ValueError("orient function is identically zero")
    if abs(sup - 1.0) > 1e-9:
        raise ValueError(f"orient must satisfy max|b| = 1, got {sup!r}")
    s = float(np.sum(b.weights * b.values * b.values))
    if s <= 0.0:
        raise ValueError("integral of b^2 must be positive")
    return 1.0 / s


def cb_h_value(
    f: GridFunction,
    a: GridFunction,
    b: GridFunction,
    eta: float,
    tol: float = 1e-9,
    max_expand: int = 200,
    max_bisect: int = 500,
) -> float:
    """Unique root of the sup-norm scalarization equation on a shared grid.

    Brackets the root by geometric expansion around the linear-case solution
    and bisects until both ``|g(y)| <= tol * (1 + |y|)`` and the bracket has
    collapsed; iteration-cap overruns signal malformed inputs.
    """
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if not (f.same_grid(a) and f.same_grid(b)):
        raise ValueError("f, a and b must live on the same quadrature grid")
    c = cb_scaling_factor(b)
    d = f.values - a.values
    w = b.weights
    bv = b.values

    def g(y: float) -> float:
        res = d - y * bv
        return c * float(np.sum(w * res * bv)) - (1.0 - eta) * float(np.max(np.abs(res)))

    y0 = c * float(np.sum(w * d * bv))
    delta = 1.0
    lo, hi = y0 - delta, y0 + delta
    it = 0
    while g(lo) < 0.0:
        delta *= 2.0
        lo = y0 - delta
        it += 1
        if it > max_expand:
            raise RuntimeError("bracket expansion failed; inputs look malformed")
    delta = 1.0
    it = 0
    while g(hi) > 0.0:
        delta *= 2.0
        hi = y0 + delta
        it += 1
        if it > max_expand:
            raise RuntimeError("bracket expansion failed; inputs look malformed")

    # g is strictly decreasing with slope in [-(2 - eta), -eta] on the bracket.
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        scale = 1.0 + abs(mid)
        if abs(gm) <= tol * scale and (hi - lo) <= 1e-13 * scale:
            return mid
        if gm > 0.0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(
        "root finder exceeded its iteration cap; check that max|b| = 1 "
        "and the grid data are finite"
    )
