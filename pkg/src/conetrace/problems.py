"""Problem abstraction and built-in test problems.

A Problem bundles an objective map from controls to image points, an exact
feasibility predicate for the admissibility set, and a deterministic sampler
of feasible controls.  Samplers are Halton-based so that, for a fixed seed,
the first n points of a larger draw equal a smaller draw (prefix property,
which the solver's nested-start monotonicity relies on).

The geometric built-ins (disk, annulus, bean, polygon) are explicit
parameterizations whose image closure is exactly the named set, with the
boundary available analytically for validation.  Radial controls saturate at
the rim so that boundary points are attained on an interior plateau of the
control box rather than only in the limit.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

ETA_REFERENCE = 1.0 - math.cos(math.pi / 8.0)


@dataclass(frozen=True)
class Problem:
    name: str
    dim_control: int
    dim_image: int
    objective: Callable[[np.ndarray], np.ndarray]
    feasible: Callable[[np.ndarray], bool]
    sampler: Callable[[int, int], np.ndarray]
    objective_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    recommended_eta: float = 1.0
    recommended_radius: float = math.inf
    analytic_lower: Optional[np.ndarray] = None
    analytic_upper: Optional[np.ndarray] = None
    analytic_boundary: Optional[Callable[[int], np.ndarray]] = None

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        """Draw ``count`` feasible controls, deterministic given the seed."""
        xs = self.sampler(int(count), int(seed))
        return np.asarray(xs, dtype=float).reshape(count, self.dim_control)

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        """Batch image evaluation with a per-row fallback."""
        xs = np.asarray(xs, dtype=float)
        if self.objective_batch is not None:
            return np.asarray(self.objective_batch(xs), dtype=float)
        return np.array([self.objective(x) for x in xs], dtype=float)


def _halton(count: int, seed: int, dim: int) -> np.ndarray:
    from scipy.stats import qmc

    h = qmc.Halton(d=dim, scramble=False)
    if seed:
        h.fast_forward(int(seed))
    return h.random(count)


def _box_sampler(lower, upper):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def sampler(count, seed):
        u = _halton(count, seed, lower.shape[0])
        return lower + u * (upper - lower)

    return sampler


def _box_feasible(lower, upper):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def feasible(x):
        return bool(np.all(x >= lower) and np.all(x <= upper))

    return feasible


def nonconvex_2d() -> Problem:
    """2-D benchmark on the unit simplex with a highly nonconvex component.

    Controls live in {x1, x2 >= 0, x1 + x2 <= 1}; the image map combines a
    radial first component with an oscillatory second component, producing a
    nonconvex image boundary.
    """

    def objective(x):
        x1, x2 = float(x[0]), float(x[1])
        return np.array([
            math.sqrt(x1 * x1 + 2.0 * x2 * x2),
            math.cos(2.0 * x1 + x2 * x2) - math.exp(-x2 * x2) + math.sin(3.0 * x1 * x2) / 3.0,
        ])

    def objective_batch(xs):
        x1, x2 = xs[:, 0], xs[:, 1]
        return np.column_stack([
            np.sqrt(x1 * x1 + 2.0 * x2 * x2),
            np.cos(2.0 * x1 + x2 * x2) - np.exp(-x2 * x2) + np.sin(3.0 * x1 * x2) / 3.0,
        ])

    def feasible(x):
        return bool(x[0] >= 0.0 and x[1] >= 0.0 and x[0] + x[1] <= 1.0)

    def sampler(count, seed):
        u = _halton(count, seed, 2)
        s = np.sqrt(u[:, 0])
        return np.column_stack([s * (1.0 - u[:, 1]), s * u[:, 1]])

    return Problem(
        name="nonconvex_2d",
        dim_control=2,
        dim_image=2,
        objective=objective,
        feasible=feasible,
        sampler=sampler,
        objective_batch=objective_batch,
        recommended_eta=ETA_REFERENCE,
        recommended_radius=math.inf,
    )


def _polar_problem(name, radial_of_s, rho_of_psi, eta, radius, t_lo=0.0):
    """Shared machinery for the polar-control built-ins.

    Controls are (t, phi) on the box [t_lo, 1.2] x [-0.25, 1.25]; the radial
    coordinate saturates outside [0, 1] and the angle wraps, so the image is
    exactly the target set and its rim is attained on control plateaus.
    """
    lower = np.array([t_lo, -0.25])
    upper = np.array([1.2, 1.25])

    def objective(x):
        s = min(max(float(x[0]), 0.0), 1.0)
        psi = 2.0 * math.pi * float(x[1])
        r = radial_of_s(s) * (rho_of_psi(psi) if rho_of_psi else 1.0)
        return np.array([r * math.cos(psi), r * math.sin(psi)])

    def objective_batch(xs):
        s = np.clip(xs[:, 0], 0.0, 1.0)
        psi = 2.0 * math.pi * xs[:, 1]
        r = radial_of_s(s) * (rho_of_psi(psi) if rho_of_psi else 1.0)
        return np.column_stack([r * np.cos(psi), r * np.sin(psi)])

    return Problem(
        name=name,
        dim_control=2,
        dim_image=2,
        objective=objective,
        feasible=_box_feasible(lower, upper),
        sampler=_box_sampler(lower, upper),
        objective_batch=objective_batch,
        recommended_eta=eta,
        recommended_radius=radius,
    )


def disk(radius: float = 1.0) -> Problem:
    """Closed disk of the given radius, centered at the origin."""
    if not radius > 0.0:
        raise ValueError("disk radius must be positive")
    prob = _polar_problem(
        "disk",
        radial_of_s=lambda s: radius * np.sqrt(s),
        rho_of_psi=None,
        eta=1.0,
        radius=math.inf,
    )
    r = float(radius)

    def boundary(n):
        ang = 2.0 * math.pi * np.arange(n) / n
        return np.column_stack([r * np.cos(ang), r * np.sin(ang)])

    return _with_geometry(prob, -r * np.ones(2), r * np.ones(2), boundary)


def annulus(r_in: float, r_out: float) -> Problem:
    """Closed annulus r_in <= ||f|| <= r_out; boundary is two circles."""
    if not 0.0 < r_in < r_out:
        raise ValueError("annulus needs 0 < r_in < r_out")
    prob = _polar_problem(
        "annulus",
        radial_of_s=lambda s: r_in + (r_out - r_in) * s,
        rho_of_psi=None,
        eta=0.3,
        radius=0.6,
        t_lo=-0.2,
    )

    def boundary(n):
        n_in = n // 2
        n_out = n - n_in
        a_in = 2.0 * math.pi * np.arange(n_in) / max(n_in, 1)
        a_out = 2.0 * math.pi * np.arange(n_out) / max(n_out, 1)
        inner = np.column_stack([r_in * np.cos(a_in), r_in * np.sin(a_in)])
        outer = np.column_stack([r_out * np.cos(a_out), r_out * np.sin(a_out)])
        return np.vstack([inner, outer])

    return _with_geometry(prob, -r_out * np.ones(2), r_out * np.ones(2), boundary)


# Bean curve: polar radius 1 + 0.55*cos(2*psi).  Smooth, strictly positive
# (rho >= 0.45, so the region is star-shaped about the origin) and nonconvex,
# with concave inlets at psi = pi/2 and 3*pi/2 where the curvature changes
# sign.  Narrow exterior cones escape the inlets without re-entering the set,
# so the shape works with untruncated cones at small sharpness.
_BEAN_A = 0.55


def _bean_rho(psi):
    return 1.0 + _BEAN_A * np.cos(2.0 * psi)


def bean() -> Problem:
    prob = _polar_problem(
        "bean",
        radial_of_s=lambda s: s,
        rho_of_psi=_bean_rho,
        eta=ETA_REFERENCE,
        radius=math.inf,
    )

    def boundary(n):
        psi = 2.0 * math.pi * np.arange(n) / n
        rho = _bean_rho(psi)
        return np.column_stack([rho * np.cos(psi), rho * np.sin(psi)])

    return _with_geometry(prob, None, None, boundary)


def _with_geometry(prob: Problem, lower, upper, boundary) -> Problem:
    from dataclasses import replace

    return replace(
        prob,
        analytic_lower=None if lower is None else np.asarray(lower, dtype=float),
        analytic_upper=None if upper is None else np.asarray(upper, dtype=float),
        analytic_boundary=boundary,
    )


def _cross(o, p, q) -> float:
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def _in_triangle(pt, a, b, c) -> bool:
    d1 = _cross(a, b, pt)
    d2 = _cross(b, c, pt)
    d3 = _cross(c, a, pt)
    return d1 >= -1e-12 and d2 >= -1e-12 and d3 >= -1e-12


def _ear_clip(verts: np.ndarray) -> list:
    """O(k^2) ear clipping of a simple polygon given in CCW order."""
    ids = list(range(len(verts)))
    tris = []
    guard = 0
    while len(ids) > 3:
        guard += 1
        if guard > 10 * len(verts) ** 2 + 100:
            raise ValueError("could not triangulate polygon; is it simple?")
        clipped = False
        for pos in range(len(ids)):
            i0 = ids[pos - 1]
            i1 = ids[pos]
            i2 = ids[(pos + 1) % len(ids)]
            a, b, c = verts[i0], verts[i1], verts[i2]
            if _cross(a, b, c) <= 1e-14:
                continue
            if any(
                _in_triangle(verts[j], a, b, c)
                for j in ids
                if j not in (i0, i1, i2)
            ):
                continue
            tris.append((i0, i1, i2))
            ids.pop(pos)
            clipped = True
            break
        if not clipped:
            raise ValueError("could not triangulate polygon; is it simple?")
    tris.append(tuple(ids))
    return tris


def polygon(vertices) -> Problem:
    """Simple polygon via triangulation controls (w, u, v) in [0, 1]^3.

    ``w`` selects a triangle by area weight, (u, v) map uniformly into it;
    the image closure is exactly the polygon.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise ValueError("polygon needs at least three 2-d vertices")
    area2 = sum(
        _cross((0.0, 0.0), verts[i], verts[(i + 1) % len(verts)])
        for i in range(len(verts))
    )
    if area2 < 0.0:
        verts = verts[::-1].copy()
    tris = _ear_clip(verts)
    corners = np.array([[verts[i], verts[j], verts[k]] for i, j, k in tris])
    areas = np.array([
        abs(_cross(t[0], t[1], t[2])) / 2.0 for t in corners
    ])
    keep = areas > 1e-14
    corners, areas = corners[keep], areas[keep]
    if len(areas) == 0:
        raise ValueError("polygon has zero area")
    cum = np.cumsum(areas)
    total = float(cum[-1])

    def _map(w, u, v):
        idx = int(np.searchsorted(cum, w * total, side="left"))
        idx = min(idx, len(areas) - 1)
        a, b, c = corners[idx]
        s = math.sqrt(u)
        return (1.0 - s) * a + s * ((1.0 - v) * b + v * c)

    def objective(x):
        return np.asarray(_map(float(x[0]), float(x[1]), float(x[2])), dtype=float)

    def objective_batch(xs):
        idx = np.minimum(
            np.searchsorted(cum, xs[:, 0] * total, side="left"), len(areas) - 1
        )
        a = corners[idx, 0]
        b = corners[idx, 1]
        c = corners[idx, 2]
        s = np.sqrt(xs[:, 1])[:, None]
        v = xs[:, 2][:, None]
        return (1.0 - s) * a + s * ((1.0 - v) * b + v * c)

    edges = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
    cum_edge = np.concatenate([[0.0], np.cumsum(edges)])
    perim = float(cum_edge[-1])

    def boundary(n):
        s = perim * np.arange(n) / n
        seg = np.minimum(np.searchsorted(cum_edge, s, side="right") - 1, len(verts) - 1)
        t = (s - cum_edge[seg]) / edges[seg]
        nxt = (seg + 1) % len(verts)
        return verts[seg] + t[:, None] * (verts[nxt] - verts[seg])

    lower = np.zeros(3)
    upper = np.ones(3)
    prob = Problem(
        name="polygon",
        dim_control=3,
        dim_image=2,
        objective=objective,
        feasible=_box_feasible(lower, upper),
        sampler=_box_sampler(lower, upper),
        objective_batch=objective_batch,
        recommended_eta=0.3,
        recommended_radius=math.inf,
    )
    return _with_geometry(prob, verts.min(axis=0), verts.max(axis=0), boundary)


# --- expression-based problems -------------------------------------------

_EXPR_FUNCS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "tan": (math.tan, np.tan),
    "asin": (math.asin, np.arcsin),
    "acos": (math.acos, np.arccos),
    "atan": (math.atan, np.arctan),
    "sinh": (math.sinh, np.sinh),
    "cosh": (math.cosh, np.cosh),
    "tanh": (math.tanh, np.tanh),
    "exp": (math.exp, np.exp),
    "log": (math.log, np.log),
    "sqrt": (math.sqrt, np.sqrt),
    "abs": (abs, np.abs),
}

_EXPR_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_EXPR_UNARY = (ast.USub, ast.UAdd)


def _validate_expr(node: ast.AST, dim_control: int, src: str):
    for sub in ast.walk(node):
        if isinstance(sub, ast.Expression):
            continue
        if isinstance(sub, ast.BinOp):
            if not isinstance(sub.op, _EXPR_BINOPS):
                raise ValueError(
                    f"unsupported operator at position {sub.col_offset} in {src!r}"
                )
            continue
        if isinstance(sub, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow,
                            ast.USub, ast.UAdd)):
            continue
        if isinstance(sub, ast.UnaryOp):
            if not isinstance(sub.op, _EXPR_UNARY):
                raise ValueError(
                    f"unsupported unary operator at position {sub.col_offset} in {src!r}"
                )
            continue
        if isinstance(sub, ast.Call):
            if not (isinstance(sub.func, ast.Name) and sub.func.id in _EXPR_FUNCS):
                raise ValueError(
                    f"unknown function at position {sub.col_offset} in {src!r}"
                )
            if sub.keywords:
                raise ValueError(
                    f"keyword arguments not allowed at position {sub.col_offset} in {src!r}"
                )
            continue
        if isinstance(sub, ast.Name):
            if sub.id in _EXPR_FUNCS:
                continue
            if sub.id.startswith("x"):
                try:
                    k = int(sub.id[1:])
                except ValueError:
                    k = -1
                if 1 <= k <= dim_control:
                    continue
            raise ValueError(
                f"unknown name {sub.id!r} at position {sub.col_offset} in {src!r}"
            )
        if isinstance(sub, ast.Constant):
            if not isinstance(sub.value, (int, float)):
                raise ValueError(
                    f"non-numeric constant at position {sub.col_offset} in {src!r}"
                )
            continue
        if isinstance(sub, ast.Load):
            continue
        raise ValueError(
            f"unsupported syntax ({type(sub).__name__}) at position "
            f"{getattr(sub, 'col_offset', 0)} in {src!r}"
        )


def compile_expression(src: str, dim_control: int):
    """Compile a math expression of x1..xd into scalar and batch evaluators.

    The caret '^' is math-style exponentiation and is normalized to '**'
    before parsing (error positions refer to the normalized text).
    """
    normalized = src.replace("^", "**")
    try:
        tree = ast.parse(normalized, mode="eval")
    except SyntaxError as exc:
        raise ValueError(
            f"syntax error at position {exc.offset} in {normalized!r}: {exc.msg}"
        ) from None
    _validate_expr(tree, dim_control, normalized)
    code = compile(tree, "<expression>", "eval")
    scalar_env = {name: fns[0] for name, fns in _EXPR_FUNCS.items()}
    batch_env = {name: fns[1] for name, fns in _EXPR_FUNCS.items()}

    def scalar(x):
        env = dict(scalar_env)
        for k in range(dim_control):
            env[f"x{k + 1}"] = float(x[k])
        return eval(code, {"__builtins__": {}}, env)

    def batch(xs):
        env = dict(batch_env)
        for k in range(dim_control):
            env[f"x{k + 1}"] = xs[:, k]
        out = eval(code, {"__builtins__": {}}, env)
        return np.broadcast_to(out, (xs.shape[0],)).astype(float)

    return scalar, batch


def expression_problem(objective_exprs, lower, upper) -> Problem:
    """Box-constrained problem from math expressions over x1..xd."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("lower and upper must be equal-length vectors")
    if np.any(lower > upper):
        raise ValueError("expression problem box is empty")
    d = lower.shape[0]
    compiled = [compile_expression(src, d) for src in objective_exprs]
    scalars = [c[0] for c in compiled]
    batches = [c[1] for c in compiled]

    def objective(x):
        return np.array([fn(x) for fn in scalars], dtype=float)

    def objective_batch(xs):
        return np.column_stack([fn(xs) for fn in batches])

    return Problem(
        name="expression",
        dim_control=d,
        dim_image=len(scalars),
        objective=objective,
        feasible=_box_feasible(lower, upper),
        sampler=_box_sampler(lower, upper),
        objective_batch=objective_batch,
    )


_BUILTIN_PARAMS = {
    "nonconvex_2d": (),
    "disk": ("radius",),
    "annulus": ("r_in", "r_out"),
    "bean": (),
    "polygon": ("vertices",),
}

BUILTINS = tuple(sorted(_BUILTIN_PARAMS))


def load_problem(spec: dict) -> Problem:
    """Construct a Problem from a config mapping.

    Either ``{"builtin": name, **params}`` for a built-in, or
    ``{"expression": {"objective": [...], "lower": [...], "upper": [...]}}``.
    """
    if not isinstance(spec, dict):
        raise ValueError("problem spec must be a mapping")
    if "builtin" in spec and "expression" in spec:
        raise ValueError("problem spec cannot be both builtin and expression")
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in _BUILTIN_PARAMS:
            raise ValueError(
                f"unknown builtin {name!r}; available: {', '.join(BUILTINS)}"
            )
        allowed = _BUILTIN_PARAMS[name]
        params = {k: v for k, v in spec.items() if k != "builtin"}
        unknown = set(params) - set(allowed)
        if unknown:
            raise ValueError(f"unknown parameters for {name!r}: {sorted(unknown)}")
        return globals()[name](**params)
    if "expression" in spec:
        sub = dict(spec["expression"])
        extra = set(spec) - {"expression"}
        if extra:
            raise ValueError(f"unknown problem keys: {sorted(extra)}")
        missing = {"objective", "lower", "upper"} - set(sub)
        if missing:
            raise ValueError(f"expression problem missing keys: {sorted(missing)}")
        unknown = set(sub) - {"objective", "lower", "upper"}
        if unknown:
            raise ValueError(f"unknown expression keys: {sorted(unknown)}")
        return expression_problem(sub["objective"], sub["lower"], sub["upper"])
    raise ValueError("problem spec needs either 'builtin' or 'expression'")
