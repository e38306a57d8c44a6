"""Transition-kernel estimation on the grid.

The kernel masses p_ij(t, s, x, cell(y)) are exactly the entries of the
discrete propagator: evolving the indicator of cell y in component j and
reading component i at x.  The full tensor is built by evolving the
identity matrix; single rows (needed for measure construction) come from
adjoint stepping, which is much cheaper.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from evosys.coefficients import CoefficientModel
from evosys.discretization import DiscreteDomain
from evosys.solver import Stepper

CLIP_FLAG_FRACTION = 1e-6


@dataclass
class KernelEstimate:
    """Cell masses of the kernels for every source point at one (s, t)."""

    dom: DiscreteDomain
    m: int
    s: float
    t: float
    P: np.ndarray  # (m, m, npts, npts), [i, j, x, y]
    clipped_mass: float
    flagged: bool

    def mass_matrix(self) -> np.ndarray:
        """Total masses p_ij(x, R^d) for each x: shape (m, m, npts)."""
        return self.P.sum(axis=3)


def _propagator_to_estimate(dom, m, s, t, M) -> KernelEstimate:
    neg = np.minimum(M, 0.0)
    clipped = float(-neg.sum())
    Mc = np.maximum(M, 0.0)
    total = float(Mc.sum()) or 1.0
    P = Mc.reshape(m, dom.npts, m, dom.npts).transpose(0, 2, 1, 3).copy()
    return KernelEstimate(
        dom=dom,
        m=m,
        s=s,
        t=t,
        P=P,
        clipped_mass=clipped,
        flagged=clipped > CLIP_FLAG_FRACTION * total,
    )


def evolve_propagator(
    model: CoefficientModel,
    dom: DiscreteDomain,
    s: float,
    t_list,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> list[KernelEstimate]:
    """Evolve the identity through the scheme, snapshotting at each t."""
    t_list = sorted(float(t) for t in t_list)
    if t_list[0] <= s:
        raise ValueError("kernel times must exceed s")
    dt = dt if dt is not None else dom.dx
    stepper = Stepper(model, dom, dt, scheme, upwind)
    n = dom.n_unknowns(model.m)
    M = np.eye(n)
    if dom.bc == "dirichlet":
        bmask = np.tile(dom.boundary_mask(), model.m)
        M[bmask, :] = 0.0
    snap_steps = {}
    for t in t_list:
        i = int(round((t - s) / dt))
        if i <= 0 or abs(s + i * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"kernel time {t} is not on the step grid")
        snap_steps[i] = t
    out = []
    t_cur = s
    for i in range(1, max(snap_steps) + 1):
        M = stepper.step_values(M, t_cur)
        t_cur = s + i * dt
        if i in snap_steps:
            out.append(_propagator_to_estimate(dom, model.m, s, snap_steps[i], M))
    return out


def estimate_kernels(
    model: CoefficientModel,
    dom: DiscreteDomain,
    s: float,
    t: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> KernelEstimate:
    (est,) = evolve_propagator(model, dom, s, [t], dt=dt, scheme=scheme, upwind=upwind)
    return est


def tail_mass(est: KernelEstimate, r: float, x_mask: Optional[np.ndarray] = None) -> np.ndarray:
    """sup over source points of the kernel mass outside the ball B_r.

    The sup runs over the inner window by default; boundary cells carry
    truncation junk that the locally uniform statement does not cover.
    """
    if r >= est.dom.L:
        raise ValueError("tail radius must be smaller than the box half-width")
    if x_mask is None:
        x_mask = est.dom.inner_mask()
    tail = est.dom.radii() > r
    sums = est.P[:, :, :, tail].sum(axis=3)  # (m, m, npts)
    return sums[:, :, x_mask].max(axis=2)


@dataclass
class TightnessTable:
    t_list: list
    r_list: list
    tails: np.ndarray  # (nt, nr, m, m)

    def max_table(self) -> np.ndarray:
        return self.tails.max(axis=(2, 3))

    def rows(self):
        for a, t in enumerate(self.t_list):
            for b, r in enumerate(self.r_list):
                for i in range(self.tails.shape[2]):
                    for j in range(self.tails.shape[3]):
                        yield t, r, i, j, float(self.tails[a, b, i, j])


def tightness_profile(
    model: CoefficientModel,
    dom: DiscreteDomain,
    s: float,
    t_list,
    r_list,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> TightnessTable:
    """Tail-mass table over times and radii; nonincreasing along r."""
    r_list = sorted(float(r) for r in r_list)
    ests = evolve_propagator(model, dom, s, t_list, dt=dt, scheme=scheme, upwind=upwind)
    tails = np.empty((len(ests), len(r_list), model.m, model.m))
    for a, est in enumerate(ests):
        for b, r in enumerate(r_list):
            tails[a, b] = tail_mass(est, r)
    return TightnessTable(t_list=[e.t for e in ests], r_list=r_list, tails=tails)


def smooth_indicator(dom: DiscreteDomain, subset, n: int) -> np.ndarray:
    """Grid ramp approximation of an indicator from inside.

    theta_n(x) = clamp(n * dist(x, complement), 0, 1): zero outside the
    subset, one where the distance to the complement reaches 1/n, linear in
    between, and pointwise nondecreasing in n.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    kind = subset[0]
    pts = dom.points
    if kind == "ball":
        center = np.asarray(subset[1], dtype=float)
        radius = float(subset[2])
        if radius <= 0:
            raise ValueError("empty subset")
        dist = radius - np.linalg.norm(pts - center[None, :], axis=1)
    elif kind == "box":
        lo = np.asarray(subset[1], dtype=float)
        hi = np.asarray(subset[2], dtype=float)
        if np.any(hi <= lo):
            raise ValueError("empty subset")
        dist = np.min(np.minimum(pts - lo[None, :], hi[None, :] - pts), axis=1)
    else:
        raise ValueError(f"unknown subset kind {kind!r}")
    return np.clip(n * np.maximum(dist, 0.0), 0.0, 1.0)


def kernel_rows(
    model: CoefficientModel,
    dom: DiscreteDomain,
    x0,
    j: int,
    s: float,
    tau_grid,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> tuple[np.ndarray, int]:
    """Rows p_{j i}(tau, s, x0, cell y) for every tau on the grid.

    Returns (rows, p0) with rows of shape (n_tau, m, npts) and p0 the grid
    index of the anchor point.  Autonomous models use forward iteration of
    the adjoint step; otherwise each tau costs a backward sweep (with the
    per-time factorization cache shared across sweeps).
    """
    dt = dt if dt is not None else dom.dx
    tau_grid = [float(t) for t in tau_grid]
    if any(t < s - 1e-12 for t in tau_grid):
        raise ValueError("tau values must not precede s")
    steps = []
    for t in tau_grid:
        i = int(round((t - s) / dt))
        if abs(s + i * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"tau {t} is not on the step grid")
        steps.append(i)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    p0 = int(np.argmin(np.linalg.norm(dom.points - x0[None, :], axis=1)))
    if dom.bc == "dirichlet" and dom.boundary_mask()[p0]:
        raise ValueError("anchor point sits on the Dirichlet boundary")
    stepper = Stepper(model, dom, dt, scheme, upwind)
    n = dom.n_unknowns(model.m)
    e = np.zeros(n)
    e[j * dom.npts + p0] = 1.0
    bproj = None
    if dom.bc == "dirichlet":
        bproj = ~np.tile(dom.boundary_mask(), model.m)

    rows = np.empty((len(tau_grid), model.m, dom.npts))

    def record(idx, w):
        v = w if bproj is None else w * bproj
        rows[idx] = v.reshape(model.m, dom.npts)

    if model.autonomous:
        order = np.argsort(steps)
        w = e.copy()
        done = 0
        for target in sorted(set(steps)):
            while done < target:
                w = stepper.step_values(w, s + done * dt, transpose=True)
                done += 1
            for idx in order:
                if steps[idx] == target:
                    record(idx, w)
    else:
        for idx, target in enumerate(steps):
            w = e.copy()
            for i in range(target, 0, -1):
                w = stepper.step_values(w, s + (i - 1) * dt, transpose=True)
            record(idx, w)
    return rows, p0
