"""Shared numerics helpers: norms, windows, sampling, parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def vector_sup_norm(values: np.ndarray, m: int, mask: np.ndarray | None = None) -> float:
    """Norm used in the sup estimates: sqrt(sum_k (sup_x |u_k|)^2).

    `values` is the flat (m*npts,) state vector; `mask` restricts the sup
    to a subset of grid points (same subset for every component).
    """
    comps = values.reshape(m, -1)
    if mask is not None:
        comps = comps[:, mask]
    sups = np.max(np.abs(comps), axis=1) if comps.size else np.zeros(m)
    return float(np.sqrt(np.sum(sups**2)))


def collar_width(L: float, dx: float) -> float:
    """Boundary collar excluded from sup-norm measurements."""
    return max(4.0 * dx, 0.1 * L)


def sample_points(box: float | tuple[float, float], d: int, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic (n, d) sample of the box [-b, b]^d.

    Mixes a structured axis grid (origin and faces included) with seeded
    uniform draws so extremes and the interior are both covered.
    """
    if isinstance(box, tuple):
        lo, hi = -abs(box[0]), abs(box[1])
    else:
        lo, hi = -abs(box), abs(box)
    rng = np.random.default_rng(seed)
    n_struct = min(n, max(3, n // 3))
    if d == 1:
        struct = np.linspace(lo, hi, n_struct)[:, None]
    else:
        side = max(2, int(round(n_struct ** (1.0 / d))))
        axes = [np.linspace(lo, hi, side)] * d
        struct = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    n_rand = max(0, n - struct.shape[0])
    rand = rng.uniform(lo, hi, size=(n_rand, d))
    pts = np.vstack([struct, rand])
    # make sure the origin is a sample; several exact verdicts are attained there
    if not np.any(np.all(pts == 0.0, axis=1)):
        pts[0] = 0.0
    return pts


def parallel_map(fn, items, jobs: int | None = None):
    """Map preserving order; `jobs=1` runs serially with identical results."""
    items = list(items)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return w
