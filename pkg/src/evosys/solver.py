"""Time stepping for the truncated Cauchy problem and the exhaustion driver.

Implicit Euler and the theta(1/2) scheme, sparse-direct solves with a fixed
residual tolerance, and the ladder L_1 < L_2 < ... realizing the limit of
Dirichlet/Neumann approximants on a fixed inner window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from evosys.coefficients import CoefficientModel, poly_offdiag_inf, poly_rowsum_sup
from evosys.discretization import DiscreteDomain, DiscreteGenerator, assemble_generator, default_upwind
from evosys.errors import CertificateError, SolveError
from evosys.util import parallel_map, sample_points

RESIDUAL_TOL = 1e-10
DIRECT_SOLVE_CAP = 200_000  # unknowns; beyond this fall back to iterative


@dataclass
class StateField:
    """Grid sample of the m-component solution at one time."""

    dom: DiscreteDomain
    m: int
    values: np.ndarray
    t: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.dom.n_unknowns(self.m),):
            raise ValueError(
                f"state vector has shape {self.values.shape}, expected ({self.dom.n_unknowns(self.m)},)"
            )
        if not np.all(np.isfinite(self.values)):
            raise SolveError("non-finite state entries", t=self.t)

    def component(self, k: int) -> np.ndarray:
        return self.values.reshape(self.m, -1)[k]

    def copy(self) -> "StateField":
        return StateField(self.dom, self.m, self.values.copy(), self.t)


def grid_field(dom: DiscreteDomain, m: int, fn, t: float = 0.0) -> StateField:
    """Sample a callable x -> (m,) (or scalar for m=1) on the grid."""
    vals = np.empty((m, dom.npts))
    for p, x in enumerate(dom.points):
        v = np.atleast_1d(np.asarray(fn(x), dtype=float))
        if v.shape != (m,):
            raise ValueError(f"initial datum returned shape {v.shape}, expected ({m},)")
        vals[:, p] = v
    return StateField(dom, m, vals.ravel(), t)


@dataclass(frozen=True)
class EvolveConfig:
    s: float
    t_end: float
    dt: float
    scheme: str = "implicit-euler"
    record_times: tuple = ()

    def __post_init__(self):
        if not self.s < self.t_end:
            raise ValueError("need s < t_end")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("implicit-euler", "theta"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for r in self.record_times:
            if r < self.s - 1e-12 or r > self.t_end + 1e-12:
                raise ValueError(f"record time {r} outside [s, t_end]")


class _IluSolver:
    """GMRES with an incomplete-LU preconditioner; the fallback past the
    direct-solve budget.  Matches the splu solve() interface."""

    def __init__(self, A):
        self.A = A.tocsr()
        self.pre = spla.spilu(A.tocsc(), drop_tol=1e-5, fill_factor=10)
        self.op = spla.LinearOperator(A.shape, self.pre.solve)

    def solve(self, rhs):
        rhs = np.asarray(rhs)
        if rhs.ndim == 1:
            out, info = spla.gmres(self.A, rhs, M=self.op, rtol=RESIDUAL_TOL / 10, atol=0.0)
            if info != 0:
                raise SolveError(f"gmres did not converge (info={info})")
            return out
        return np.stack([self.solve(col) for col in rhs.T], axis=1)


class Stepper:
    """One-step propagator with factorization caching.

    Autonomous models assemble and factorize once; nonautonomous models
    reassemble each step and cache by time stamp.  `transpose=True` applies
    the adjoint of the step map, which is how kernel rows and measure
    pull-backs are computed.
    """

    def __init__(self, model, dom, dt, scheme="implicit-euler", upwind=None):
        self.model = model
        self.dom = dom
        self.dt = float(dt)
        self.scheme = scheme
        self.theta = 1.0 if scheme == "implicit-euler" else 0.5
        self.upwind = default_upwind(model) if upwind is None else bool(upwind)
        self.direct = dom.n_unknowns(model.m) <= DIRECT_SOLVE_CAP
        self._gens: dict = {}
        self._lus: dict = {}
        self._eye = sp.identity(dom.n_unknowns(model.m), format="csr")

    def generator(self, t: float) -> DiscreteGenerator:
        key = None if self.model.autonomous else round(float(t), 12)
        if key not in self._gens:
            self._gens[key] = assemble_generator(self.model, self.dom, t, upwind=self.upwind)
        return self._gens[key]

    def _lu(self, t: float, transpose: bool):
        key = (None if self.model.autonomous else round(float(t), 12), transpose)
        if key not in self._lus:
            A = self._eye - self.theta * self.dt * self.generator(t).matrix
            if transpose:
                A = A.T
            solver = spla.splu(A.tocsc()) if self.direct else _IluSolver(A)
            self._lus[key] = (solver, A.tocsr())
        return self._lus[key]

    def step_values(self, values: np.ndarray, t: float, transpose: bool = False) -> np.ndarray:
        """Advance raw values from t to t + dt (or apply the adjoint map)."""
        dt, th = self.dt, self.theta
        if not transpose:
            rhs = values if th == 1.0 else values + (1.0 - th) * dt * (self.generator(t).matrix @ values)
            lu, A = self._lu(t + dt, transpose=False)
            out = lu.solve(rhs)
            _check_residual(A, out, rhs, t + dt)
            return out
        # adjoint of [solve(S, .) o R]: R^T o solve(S^T, .)
        lu, A = self._lu(t + dt, transpose=True)
        mid = lu.solve(values)
        _check_residual(A, mid, values, t + dt)
        if th == 1.0:
            return mid
        return mid + (1.0 - th) * dt * (self.generator(t).matrix.T @ mid)


def _check_residual(A, x, rhs, t):
    nrm = np.linalg.norm(rhs) if rhs.ndim == 1 else np.linalg.norm(rhs, ord="fro")
    if nrm == 0.0:
        return
    res = A @ x - rhs
    rnorm = np.linalg.norm(res) if res.ndim == 1 else np.linalg.norm(res, ord="fro")
    if not np.isfinite(rnorm) or rnorm > RESIDUAL_TOL * nrm:
        raise SolveError(f"linear solve residual {rnorm/nrm:.3e} exceeds {RESIDUAL_TOL}", t=t)


def step(gen_at: Callable[[float], DiscreteGenerator], u: StateField, dt: float, scheme: str = "implicit-euler") -> StateField:
    """Single step u(t) -> u(t+dt) from a generator evaluator.

    Implicit Euler solves (I - dt L(t+dt)) u+ = u; the theta scheme solves
    (I - th dt L(t+dt)) u+ = (I + (1-th) dt L(t)) u with th = 1/2.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    th = 1.0 if scheme == "implicit-euler" else 0.5
    n = u.values.shape[0]
    eye = sp.identity(n, format="csr")
    rhs = u.values
    if th != 1.0:
        rhs = rhs + (1.0 - th) * dt * (gen_at(u.t).matrix @ rhs)
    A = (eye - th * dt * gen_at(u.t + dt).matrix).tocsc()
    try:
        out = spla.splu(A).solve(rhs)
    except RuntimeError as err:
        raise SolveError(f"sparse factorization failed: {err}", t=u.t + dt) from err
    _check_residual(A.tocsr(), out, rhs, u.t + dt)
    return StateField(u.dom, u.m, out, u.t + dt)


def _step_grid(cfg: EvolveConfig):
    n_steps = int(round((cfg.t_end - cfg.s) / cfg.dt))
    if abs(cfg.s + n_steps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, abs(cfg.t_end)):
        raise ValueError("t_end - s is not an integer number of steps")
    return n_steps


def _record_index(cfg: EvolveConfig, n_steps: int) -> dict:
    idx = {}
    for r in cfg.record_times:
        i = int(round((r - cfg.s) / cfg.dt))
        if i < 0 or i > n_steps or abs(cfg.s + i * cfg.dt - r) > 1e-9 * max(1.0, abs(r)):
            raise ValueError(f"record time {r} is not on the step grid")
        idx.setdefault(i, []).append(r)
    return idx


def evolve(
    model: CoefficientModel,
    dom: DiscreteDomain,
    cfg: EvolveConfig,
    f: StateField,
    upwind: Optional[bool] = None,
) -> list[StateField]:
    """Run the scheme from s to t_end, returning fields at the record times."""
    if abs(f.t - cfg.s) > 1e-12 * max(1.0, abs(cfg.s)):
        raise ValueError("initial field timestamp must equal cfg.s")
    if f.dom is not dom and (f.dom.N != dom.N or f.dom.L != dom.L or f.dom.d != dom.d):
        raise ValueError("initial field lives on a different grid")
    n_steps = _step_grid(cfg)
    recorder = _record_index(cfg, n_steps)
    stepper = Stepper(model, dom, cfg.dt, cfg.scheme, upwind)
    values = f.values.copy()
    if dom.bc == "dirichlet":
        bmask = np.tile(dom.boundary_mask(), model.m)
        values[bmask] = 0.0
    records = {}
    if 0 in recorder:
        records[0] = values.copy()
    t = cfg.s
    for i in range(1, n_steps + 1):
        values = stepper.step_values(values, t)
        t = cfg.s + i * cfg.dt
        if i in recorder:
            records[i] = values.copy()
    out = []
    for r in cfg.record_times:
        i = int(round((r - cfg.s) / cfg.dt))
        out.append(StateField(dom, model.m, records[i].copy(), r))
    return out


@dataclass
class ExhaustionReport:
    ladder: list
    deltas: list
    converged: bool
    field: StateField
    inner_L: float
    bc: str


def exhaustion_solve(
    model: CoefficientModel,
    f_eval,
    s: float,
    t_end: float,
    ladder,
    inner_L: float,
    tol: float,
    bc: str,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    jobs: int | None = 1,
) -> ExhaustionReport:
    """Drive the domain limit: solve on each rung, compare on the inner box.

    The rungs must share the grid spacing and use odd N so the inner windows
    are nested sample sets; dt is shared too, so rung differences isolate
    the domain-truncation error.
    """
    ladder = [(float(L), int(N)) for (L, N) in ladder]
    if len(ladder) == 0:
        raise ValueError("empty ladder")
    Ls = [L for L, _ in ladder]
    if any(b <= a for a, b in zip(Ls, Ls[1:])):
        raise ValueError("ladder must be strictly increasing in L")
    if inner_L >= min(Ls):
        raise ValueError("inner_L must be smaller than every rung half-width")
    dxs = [2.0 * L / (N - 1) for L, N in ladder]
    if any(abs(h - dxs[0]) > 1e-12 * dxs[0] for h in dxs):
        raise ValueError("non-nested ladder: grid spacing varies across rungs")
    if any(N % 2 == 0 for _, N in ladder):
        raise ValueError("non-nested ladder: rung N must be odd so windows align")
    dt = dt if dt is not None else dxs[0]

    def run(rung):
        L, N = rung
        dom = DiscreteDomain(d=model.d, L=L, N=N, bc=bc)
        f = grid_field(dom, model.m, f_eval, t=s)
        cfg = EvolveConfig(s=s, t_end=t_end, dt=dt, scheme=scheme, record_times=(t_end,))
        (final,) = evolve(model, dom, cfg, f, upwind=upwind)
        mask = dom.window_mask(inner_L)
        inner = final.values.reshape(model.m, -1)[:, mask]
        return dom, final, inner

    results = parallel_map(run, ladder, jobs=jobs)
    deltas = []
    for (_, _, a), (_, _, b) in zip(results, results[1:]):
        if a.shape != b.shape:
            raise ValueError("inner windows do not align across rungs")
        deltas.append(float(np.max(np.abs(a - b))))
    converged = bool(deltas) and deltas[-1] <= tol
    return ExhaustionReport(
        ladder=ladder,
        deltas=deltas,
        converged=converged,
        field=results[-1][1],
        inner_L=inner_L,
        bc=bc,
    )


def compute_Kbar(model: CoefficientModel, sample_box, sample_times, n_samples: int = 400, seed: int = 0):
    """The comparison matrix behind the sup estimate.

    Off-diagonal entries are infima of c_ij, the diagonal collects the
    row-sum suprema; K is the spectral norm.  Polynomial models use exact
    growth-order infima/suprema, everything else is sampled on the box.
    """
    ts = [float(t) for t in sample_times]
    if len(ts) == 0 or n_samples < 1:
        raise ValueError("empty sample set")
    m = model.m
    Cbar = np.zeros((m, m))
    if model.poly is not None:
        spec = model.poly
        for i in range(m):
            for j in range(m):
                if i != j:
                    Cbar[i, j] = poly_offdiag_inf(spec, i, j)[0]  # raises when unbounded below
        for i in range(m):
            sup_i, certified = poly_rowsum_sup(spec, i)
            if not certified or not math.isfinite(sup_i):
                raise CertificateError(
                    f"row {i} coupling sum unbounded above; no comparison matrix",
                    witness={"row": i},
                )
            Cbar[i, i] = sup_i - sum(Cbar[i, k] for k in range(m) if k != i)
    else:
        xs = sample_points(sample_box, model.d, n_samples, seed)
        Cs = np.array([[np.asarray(model.coupling(t, x), dtype=float) for x in xs] for t in ts])
        for i in range(m):
            for j in range(m):
                if i != j:
                    Cbar[i, j] = float(np.min(Cs[:, :, i, j]))
        rowsup = Cs.sum(axis=3).max(axis=(0, 1))
        for i in range(m):
            Cbar[i, i] = float(rowsup[i]) - sum(Cbar[i, k] for k in range(m) if k != i)
    K = float(np.linalg.norm(Cbar, ord=2))
    return Cbar, K
