"""Evolution systems of invariant measures by Cesaro averaging.

The measures at an integer anchor time are time averages of kernel rows at
a fixed source point; smaller non-integer times are filled in by pulling a
later anchor back through the adjoint propagator.  Convergence is judged by
a total-variation ladder between the full and the half horizon; a limit
collapsing to zero mass is flagged, not resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from evosys.coefficients import (
    CoefficientModel,
    ScalarC2,
    VectorC2,
    eval_operator,
    eval_scalar_part,
)
from evosys.discretization import DiscreteDomain
from evosys.errors import CertificateError
from evosys.kernels import kernel_rows
from evosys.solver import EvolveConfig, StateField, Stepper, evolve
from evosys.util import sample_points
from evosys.verify import PropertyVerdict, _verdict

TRIVIAL_MASS_TOL = 1e-6


@dataclass
class MeasureSystem:
    """Nonnegative cell masses mu_{i,t} for each stored time t."""

    dom: DiscreteDomain
    m: int
    j: int
    x0: np.ndarray
    anchor_index: int
    times: list
    masses: dict  # time -> (m, npts) nonnegative cell masses
    tv_ladder: dict  # anchor time -> list of (horizon, tv step)
    converged: bool
    trivial: bool
    horizon: float
    clipped: float

    def mass(self, t: float) -> np.ndarray:
        for key in self.masses:
            if abs(key - t) <= 1e-9 * max(1.0, abs(t)):
                return self.masses[key]
        raise KeyError(f"no measure stored at t={t}")

    def total_mass(self, t: float) -> float:
        return float(self.mass(t).sum())

    def integrate(self, t: float, values: np.ndarray) -> float:
        """sum_i integral of component i against mu_{i,t} (cell masses)."""
        mu = self.mass(t)
        return float(np.sum(mu * values.reshape(self.m, -1)))

    def lp_norm(self, t: float, values: np.ndarray, p: float) -> float:
        mu = self.mass(t)
        comps = values.reshape(self.m, -1)
        if math.isinf(p):
            sel = mu > 0
            return float(np.max(np.abs(comps)[sel])) if sel.any() else 0.0
        return float(np.sum(np.abs(comps) ** p * mu) ** (1.0 / p))


def tv_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).sum())


def cesaro_measures(
    model: CoefficientModel,
    dom: DiscreteDomain,
    x0,
    j: int,
    n: int,
    r: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    tau_step: Optional[float] = None,
    tv_tol: float = 5e-3,
    s_times=(),
) -> MeasureSystem:
    """Build the measure system anchored at (x0, j).

    Cesaro averages (time integrals of kernel rows, trapezoid on tau_step)
    are taken at every integer time up to n; requested non-integer times
    below n are produced by adjoint pull-back from the next anchor.
    """
    if n < 0 or r <= n:
        raise ValueError("need horizon r > anchor n >= 0")
    dt = dt if dt is not None else dom.dx
    if tau_step is None:
        tau_step = 4.0 * dt
    tau_step = max(dt, round(tau_step / dt) * dt)

    masses: dict = {}
    tv_ladder: dict = {}
    converged = True
    trivial = False
    clipped = 0.0
    for a in range(0, n + 1):
        n_tau = int(math.floor((r - a) / tau_step + 1e-9))
        if n_tau < 4:
            raise ValueError(f"horizon leaves fewer than 4 tau nodes at anchor {a}")
        taus = a + tau_step * np.arange(n_tau + 1)
        rows, _ = kernel_rows(model, dom, x0, j, float(a), taus, dt=dt, scheme=scheme, upwind=upwind)
        # cumulative trapezoid integral over tau
        cums = np.cumsum(0.5 * tau_step * (rows[1:] + rows[:-1]), axis=0)

        def avg_at(idx):
            return cums[idx - 1] / (taus[idx] - a)

        full = avg_at(len(taus) - 1)
        half = avg_at(max(1, (len(taus) - 1) // 2))
        quarter = avg_at(max(1, (len(taus) - 1) // 4))
        tv_ladder[float(a)] = [
            (float(taus[(len(taus) - 1) // 2]), tv_norm(half, quarter)),
            (float(taus[-1]), tv_norm(full, half)),
        ]
        converged = converged and tv_norm(full, half) <= tv_tol
        clipped += float(-np.minimum(full, 0.0).sum())
        masses[float(a)] = np.maximum(full, 0.0)
        # a zero limit shows up as geometric mass decay along the ladder
        mass_full, mass_half = float(full.sum()), float(half.sum())
        if mass_full <= TRIVIAL_MASS_TOL or mass_full <= 0.6 * mass_half:
            trivial = True

    # extension to requested times below n through the adjoint propagator
    extra = sorted(set(float(s) for s in s_times))
    stepper = Stepper(model, dom, dt, scheme, upwind)
    for s in extra:
        if s in masses or s > n:
            continue
        if s < 0:
            raise ValueError("extension times must be nonnegative")
        anchor = math.ceil(s - 1e-12)
        anchor = min(max(anchor, 0), n)
        if anchor <= s:
            anchor = min(anchor + 1, n)
        k_steps = int(round((anchor - s) / dt))
        if abs(s + k_steps * dt - anchor) > 1e-9:
            raise ValueError(f"extension time {s} is not on the step grid")
        w = masses[float(anchor)].ravel().copy()
        for i in range(k_steps, 0, -1):
            w = stepper.step_values(w, s + (i - 1) * dt, transpose=True)
        masses[s] = np.maximum(w.reshape(model.m, dom.npts), 0.0)

    x0v = np.atleast_1d(np.asarray(x0, dtype=float))
    return MeasureSystem(
        dom=dom,
        m=model.m,
        j=j,
        x0=x0v,
        anchor_index=n,
        times=sorted(masses),
        masses=masses,
        tv_ladder=tv_ladder,
        converged=bool(converged),
        trivial=bool(trivial),
        horizon=float(r),
        clipped=clipped,
    )


def _as_field(dom, m, f, t) -> StateField:
    if isinstance(f, StateField):
        return StateField(dom, m, f.values.copy(), t)
    vals = np.empty((m, dom.npts))
    for p, x in enumerate(dom.points):
        vals[:, p] = np.atleast_1d(np.asarray(f(x), dtype=float))
    return StateField(dom, m, vals.ravel(), t)


def invariance_residual(
    ms: MeasureSystem,
    model: CoefficientModel,
    dom: DiscreteDomain,
    f,
    s: float,
    t: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> float:
    """|sum_i <(G(t,s)f)_i, mu_{i,t}> - sum_i <f_i, mu_{i,s}>|."""
    if not s < t:
        raise ValueError("need s < t")
    dt = dt if dt is not None else dom.dx
    f0 = _as_field(dom, ms.m, f, s)
    if not np.all(np.isfinite(f0.values)):
        raise ValueError("test function not finite on the grid")
    cfg = EvolveConfig(s=s, t_end=t, dt=dt, scheme=scheme, record_times=(t,))
    (ut,) = evolve(model, dom, cfg, f0, upwind=upwind)
    lhs = ms.integrate(t, ut.values)
    rhs = ms.integrate(s, f0.values)
    return abs(lhs - rhs)


def check_lp_mu_bound(
    ms: MeasureSystem,
    model: CoefficientModel,
    dom: DiscreteDomain,
    p: float,
    f_list,
    s: float,
    t: float,
    K: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    tol: float = 5e-2,
) -> PropertyVerdict:
    """Lp(mu) operator bound (2 e^{K(t-s)})^{(p-1)/p} over a test battery."""
    if p < 1:
        raise ValueError("p must be at least 1")
    dt = dt if dt is not None else dom.dx
    bound = (2.0 * math.exp(K * (t - s))) ** ((p - 1.0) / p)
    measured, wit = -math.inf, []
    for idx, f in enumerate(f_list):
        f0 = _as_field(dom, ms.m, f, s)
        denom = ms.lp_norm(s, f0.values, p)
        if denom == 0.0:
            raise ValueError(f"test function {idx} has zero L^p(mu_s) norm")
        cfg = EvolveConfig(s=s, t_end=t, dt=dt, scheme=scheme, record_times=(t,))
        (ut,) = evolve(model, dom, cfg, f0, upwind=upwind)
        ratio = ms.lp_norm(t, ut.values, p) / denom
        if ratio > measured:
            measured, wit = ratio, [{"f_index": idx, "value": ratio}]
    return _verdict("lp_mu_bound", measured, bound, tol, "rel", witnesses=wit, constants={"p": p, "K": K})


def finite_rank_projection(ms: MeasureSystem, t: float, partition, values: np.ndarray) -> np.ndarray:
    """Componentwise conditional expectation onto a partition of the box.

    `partition` is a list of disjoint grid-index arrays covering the grid;
    each cell must carry positive mass in every component.
    """
    mu = ms.mass(t)
    comps = np.asarray(values, dtype=float).reshape(ms.m, -1)
    covered = np.zeros(comps.shape[1], dtype=bool)
    out = np.zeros_like(comps)
    for cell in partition:
        cell = np.asarray(cell, dtype=int)
        if covered[cell].any():
            raise ValueError("partition cells overlap")
        covered[cell] = True
        for ell in range(ms.m):
            mass = float(mu[ell, cell].sum())
            if mass <= 0.0:
                raise ValueError(f"partition cell has zero mass in component {ell}")
            out[ell, cell] = float((comps[ell, cell] * mu[ell, cell]).sum()) / mass
    if not covered.all():
        raise ValueError("partition does not cover the grid")
    return out.ravel()


def build_uniform_partition(ms: MeasureSystem, t: float, width: float, min_mass: float = 1e-12):
    """Equal-width partition of the mass-carrying core; the first and last
    cells absorb the (possibly mass-free) tails out to the box faces."""
    dom = ms.dom
    if dom.d != 1:
        raise NotImplementedError("partitions are built for d=1 runs")
    mu_tot = ms.mass(t).sum(axis=0)
    total = mu_tot.sum()
    carrying = np.where(mu_tot > min_mass * total)[0]
    if len(carrying) == 0:
        raise ValueError("measure carries no mass above the threshold")
    xs = dom.points[:, 0]
    lo, hi = xs[carrying[0]], xs[carrying[-1]]
    n_cells = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n_cells + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    cells = []
    for a, b in zip(edges[:-1], edges[1:]):
        idx = np.where((xs >= a) & (xs < b))[0]
        if len(idx):
            cells.append(idx)
    # merge any cell that lacks mass in some component into its neighbor
    merged = [cells[0]]
    for cell in cells[1:]:
        mu = ms.mass(t)
        if all(mu[ell, cell].sum() > 0 for ell in range(ms.m)) and all(
            mu[ell, merged[-1]].sum() > 0 for ell in range(ms.m)
        ):
            merged.append(cell)
        else:
            merged[-1] = np.concatenate([merged[-1], cell])
    return merged


def check_limit_certificate(
    model: CoefficientModel,
    g,
    j: Optional[int],
    interval: tuple[float, float],
    sample_box: float,
    n_samples: int = 256,
    seed: int = 0,
) -> bool:
    """Certificate ruling out trivial Cesaro limits.

    Scalar route: g positive bounded with (A_j + c_jj) g >= 0; vector route
    (j=None): componentwise A(t) g >= 0.  Checked on samples; raises with a
    witness when violated."""
    t0, t1 = interval
    ts = np.linspace(t0, t1, 7) if t1 > t0 else np.array([t0])
    xs = sample_points(sample_box, model.d, n_samples, seed)
    if j is not None:
        assert isinstance(g, ScalarC2)
        for t in ts:
            for x in xs:
                gv = g.value(x)
                if gv <= 0:
                    raise CertificateError("certificate function must be positive", witness={"x": list(map(float, x))})
                val = eval_scalar_part(model, j, g, t, x) + float(model.coupling(t, x)[j, j]) * gv
                if val < 0:
                    raise CertificateError(
                        "scalar certificate inequality fails",
                        witness={"t": float(t), "x": list(map(float, x)), "value": float(val)},
                    )
        return True
    assert isinstance(g, VectorC2)
    for t in ts:
        for x in xs:
            vals = eval_operator(model, g, t, x)
            if np.min(np.asarray(g.value(x))) <= 0:
                raise CertificateError("certificate function must be positive", witness={"x": list(map(float, x))})
            if np.min(vals) < 0:
                raise CertificateError(
                    "vector certificate inequality fails",
                    witness={"t": float(t), "x": list(map(float, x)), "value": float(np.min(vals))},
                )
    return True
