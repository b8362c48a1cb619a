"""Brute-force geometric boundary oracle and set-distance metrics.

The oracle rasterizes a dense image sample into an occupancy grid and takes
the centers of occupied cells with at least one unoccupied face-neighbor as
a discrete boundary.  As the cell size shrinks and the sample grows, this
converges to the true boundary in Hausdorff distance for the built-in
problems, which makes it an independent yardstick for the scalarization
sweep output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class OccupancyGrid:
    origin: np.ndarray
    cell: float
    dims: tuple
    occupied: np.ndarray  # sorted flat cell codes

    @property
    def n_occupied(self) -> int:
        return int(self.occupied.shape[0])


@dataclass(frozen=True)
class BoundaryPoint:
    """One emitted boundary candidate with its witnessing cell."""

    image: np.ndarray
    control: np.ndarray
    base: np.ndarray
    orient: np.ndarray
    level: int
    value: float
    h: float


@dataclass(frozen=True)
class BoundaryCloud:
    points: tuple
    problem_name: str
    config_digest: str

    def images(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 0))
        return np.array([p.image for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


def dedup_points(points, eps: float) -> list:
    """Greedy radius-dedup keeping, per cluster, the first-listed point.

    Callers order candidates best-first (cell order, then descending raw
    value within a cell), so each surviving representative is the best of
    its cluster.  ``eps <= 0`` removes exact duplicates only.  Uses a
    spatial hash, so the pass is linear in the number of candidates.
    """
    import itertools

    radius = max(eps, 1e-12)
    kept: list = []
    if not points:
        return kept
    m = points[0].image.shape[0]
    offsets = list(itertools.product((-1, 0, 1), repeat=m))
    buckets: dict = {}
    for p in points:
        key = tuple(np.floor(p.image / radius).astype(np.int64))
        dup = False
        for off in offsets:
            nb = tuple(k + o for k, o in zip(key, off))
            for q in buckets.get(nb, ()):
                if float(np.linalg.norm(p.image - q)) <= radius:
                    dup = True
                    break
            if dup:
                break
        if dup:
            continue
        kept.append(p)
        buckets.setdefault(key, []).append(p.image)
    return kept


def image_cloud(problem, n: int, seed: int = 0) -> np.ndarray:
    """Image of n sampled feasible controls; deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = problem.sample(n, seed)
    return problem.evaluate(xs)


def rasterize(points, h: float) -> OccupancyGrid:
    """Occupancy grid of the point cloud at cell size h."""
    if h <= 0.0:
        raise ValueError("cell size must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.size == 0:
        raise ValueError("point cloud must be nonempty")
    origin = np.floor(pts.min(axis=0) / h) * h
    idx = np.floor((pts - origin) / h + 1e-12).astype(np.int64)
    # Pad one empty layer per side so neighbor codes never wrap across rows.
    idx += 1
    dims = tuple(int(d) for d in idx.max(axis=0) + 2)
    strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    codes = np.unique(idx @ strides)
    return OccupancyGrid(origin=origin, cell=float(h), dims=dims, occupied=codes)


def boundary_cells(grid: OccupancyGrid) -> np.ndarray:
    """Centers of occupied cells with at least one unoccupied face-neighbor."""
    codes = grid.occupied
    m = len(grid.dims)
    strides = np.ones(m, dtype=np.int64)
    for k in range(m - 2, -1, -1):
        strides[k] = strides[k + 1] * grid.dims[k + 1]
    if codes.shape[0] == 1:
        mask = np.ones(1, dtype=bool)
    else:
        mask = np.zeros(codes.shape[0], dtype=bool)
        for s in strides:
            for off in (s, -s):
                mask |= ~np.isin(codes + off, codes, assume_unique=False)
    picked = codes[mask]
    # Decode flat codes back to multi-indices (undo the one-cell pad).
    out = np.empty((picked.shape[0], m))
    rem = picked.copy()
    for k in range(m):
        q = rem // strides[k]
        rem = rem - q * strides[k]
        out[:, k] = q - 1
    return grid.origin[None, :] + (out + 0.5) * grid.cell


def occupancy_boundary(points, h: float) -> np.ndarray:
    """Discrete boundary of the sampled image at resolution h."""
    return boundary_cells(rasterize(points, h))


def nearest_distances(a, b) -> np.ndarray:
    """Distance from each point of a to the nearest point of b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("point sets must be nonempty")
    tree = cKDTree(b)
    d, _ = tree.query(a)
    return np.asarray(d, dtype=float)


def hausdorff(a, b):
    """Directed distances (a->b, b->a) and their maximum."""
    d_ab = float(nearest_distances(a, b).max())
    d_ba = float(nearest_distances(b, a).max())
    return d_ab, d_ba, max(d_ab, d_ba)
