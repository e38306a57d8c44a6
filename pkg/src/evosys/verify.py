"""Executable property checks for solver output.

Each check produces a PropertyVerdict with the measured quantity, the bound
it must respect, and the worst witnesses.  Checks demand their hypothesis
certificates up front and raise CertificateError when those are absent, so
a passing verdict can never be vacuous.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from evosys.coefficients import (
    CoefficientModel,
    HypothesisReport,
    ScalarC2,
    VectorC2,
    check_exponent_conditions,
)
from evosys.discretization import DiscreteDomain
from evosys.errors import CertificateError
from evosys.solver import EvolveConfig, StateField, evolve, grid_field
from evosys.util import sample_points, vector_sup_norm


@dataclass
class PropertyVerdict:
    prop: str
    passed: bool
    measured: float
    bound: float
    margin: float
    tol: float
    tol_mode: str  # "abs" | "rel"
    witnesses: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "property": self.prop,
            "pass": self.passed,
            "measured": self.measured,
            "bound": self.bound,
            "margin": self.margin,
            "tol": self.tol,
            "tol_mode": self.tol_mode,
            "witnesses": self.witnesses,
            "constants": self.constants,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _verdict(prop, measured, bound, tol, tol_mode, witnesses=None, constants=None) -> PropertyVerdict:
    measured = float(measured)
    bound = float(bound)
    if tol_mode == "abs":
        passed = measured <= bound + tol
    else:
        passed = measured <= bound * (1.0 + tol)
    return PropertyVerdict(
        prop=prop,
        passed=bool(passed),
        measured=measured,
        bound=bound,
        margin=bound - measured,
        tol=tol,
        tol_mode=tol_mode,
        witnesses=witnesses or [],
        constants=constants or {},
    )


def _worst_entries(records, mask, m, top=1, sign=+1):
    """Worst (t, x, k) entries of a trajectory; sign=-1 hunts minima."""
    out = []
    for rec in records:
        vals = rec.values.reshape(m, -1)[:, mask] * sign
        k, p = np.unravel_index(np.argmax(vals), vals.shape)
        pts = rec.dom.points[mask]
        out.append({"t": rec.t, "x": [float(v) for v in pts[p]], "k": int(k), "value": float(sign * vals[k, p])})
    out.sort(key=lambda w: -w["value"] * sign)
    return out[:top]


# ---------------------------------------------------------------------------

def check_max_principle(f: StateField, records, structural: HypothesisReport) -> PropertyVerdict:
    """Nonpositive data stays nonpositive, given the sign-pattern certificate."""
    for name in ("offdiag_nonneg", "rowsum_nonpos"):
        if not structural.has(name) or not structural.ok(name):
            raise CertificateError(f"maximum principle needs certificate {name!r}")
    m = records[0].m
    mask = records[0].dom.inner_mask()
    measured = max(float(np.max(r.values.reshape(m, -1)[:, mask])) for r in records)
    wit = _worst_entries(records, mask, m, top=3)
    return _verdict("max_principle", measured, 0.0, 1e-8, "abs", witnesses=wit)


def check_sup_estimate(f: StateField, records, K: float) -> PropertyVerdict:
    """Growth envelope: sup-norm never beats e^{K (t-s)} times the data norm."""
    m = records[0].m
    mask = records[0].dom.inner_mask()
    fnorm = vector_sup_norm(f.values, m, mask)
    if fnorm == 0.0:
        raise ValueError("zero initial datum")
    measured, wit = -math.inf, []
    for rec in records:
        ratio = vector_sup_norm(rec.values, m, mask) * math.exp(-K * (rec.t - f.t)) / fnorm
        if ratio > measured:
            measured = ratio
            wit = [{"t": rec.t, "value": ratio}]
    return _verdict("sup_estimate", measured, 1.0, 5e-3, "rel", witnesses=wit, constants={"K": K})


def check_lyapunov_bound(
    model: CoefficientModel,
    dom: DiscreteDomain,
    s: float,
    t_list,
    phi: ScalarC2,
    a: float,
    c: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> PropertyVerdict:
    """G(t,s)(phi 1) <= phi + a/c on the inner window (Dirichlet run)."""
    if a is None or c is None or c <= 0:
        raise CertificateError("dissipative certificate (a, c > 0) required")
    if dom.bc != "dirichlet":
        dom = DiscreteDomain(dom.d, dom.L, dom.N, "dirichlet")
    dt = dt if dt is not None else dom.dx
    f = grid_field(dom, model.m, lambda x: np.full(model.m, phi.value(x)), t=s)
    cfg = EvolveConfig(s=s, t_end=max(t_list), dt=dt, scheme=scheme, record_times=tuple(t_list))
    records = evolve(model, dom, cfg, f, upwind=upwind)
    mask = dom.inner_mask()
    phis = np.array([phi.value(x) for x in dom.points[mask]])
    measured, wit = -math.inf, []
    for rec in records:
        excess = rec.values.reshape(model.m, -1)[:, mask] - phis[None, :] - a / c
        k, p = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[k, p] > measured:
            measured = float(excess[k, p])
            wit = [{"t": rec.t, "x": [float(v) for v in dom.points[mask][p]], "k": int(k), "value": measured}]
    return _verdict(
        "lyapunov_bound", measured, 0.0, 1e-3 * (a / c), "abs", witnesses=wit, constants={"a": a, "c": c}
    )


def check_lower_bound_c0(
    model: CoefficientModel,
    dom: DiscreteDomain,
    window: tuple[float, float],
    cert,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    n_records: int = 8,
) -> PropertyVerdict:
    """Uniform positivity of G(t,s) 1 on the inner window."""
    ok = bool(cert.ok) if hasattr(cert, "ok") else bool(cert)
    if not ok:
        raise CertificateError("Hypothesis for the auxiliary supersolution w_k is required")
    s0, t0 = window
    dt = dt if dt is not None else dom.dx
    steps = max(1, int(round((t0 - s0) / dt)))
    recs = sorted({s0 + max(1, round(i * steps / n_records)) * dt for i in range(1, n_records + 1)})
    recs = [t for t in recs if t <= t0 + 1e-12] or [t0]
    f = grid_field(dom, model.m, lambda x: np.ones(model.m), t=s0)
    cfg = EvolveConfig(s=s0, t_end=max(recs), dt=dt, scheme=scheme, record_times=tuple(recs))
    records = evolve(model, dom, cfg, f, upwind=upwind)
    mask = dom.inner_mask()
    c0 = min(float(np.min(r.values.reshape(model.m, -1)[:, mask])) for r in records)
    wit = _worst_entries(records, mask, model.m, top=1, sign=-1)
    return _verdict("lower_bound_c0", -c0, 0.0, 0.0, "abs", witnesses=wit, constants={"c0": c0})


def ode_comparison_envelope(h: Callable[[float], float], c0: float, y0: float, b: float, rtol: float = 1e-10) -> float:
    """Solve y' = -c0 h(y), y(0) = y0, return y(b)."""
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    sol = solve_ivp(lambda t, y: -c0 * h(y[0]), (0.0, b), [y0], rtol=rtol, atol=1e-12, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"ODE solve failed: {sol.message}")
    yb = float(sol.y[0, -1])
    if yb < 0.0:
        # undershoot past the equilibrium region: clamp at the root of h
        try:
            root = brentq(h, 0.0, max(y0, 1.0))
            yb = max(yb, root)
        except ValueError:
            yb = 0.0
    return yb


def check_ode_envelope(
    model: CoefficientModel,
    dom: DiscreteDomain,
    s: float,
    deltas,
    phi: ScalarC2,
    h: Callable[[float], float],
    c0: float,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    tol: float = 5e-2,
) -> PropertyVerdict:
    """Pointwise comparison of G(s+delta, s)(phi 1) against the ODE flow
    started from phi(x), uniformly over the inner window."""
    if c0 is None or c0 <= 0:
        raise CertificateError("positive c0 certificate required")
    dt = dt if dt is not None else dom.dx
    t_list = [s + d for d in deltas]
    f = grid_field(dom, model.m, lambda x: np.full(model.m, phi.value(x)), t=s)
    cfg = EvolveConfig(s=s, t_end=max(t_list), dt=dt, scheme=scheme, record_times=tuple(t_list))
    records = evolve(model, dom, cfg, f, upwind=upwind)
    mask = dom.inner_mask()
    pts = dom.points[mask]
    phis = np.array([phi.value(x) for x in pts])
    order = np.argsort(phis)
    measured, wit = -math.inf, []
    for rec, delta in zip(records, deltas):
        vals = rec.values.reshape(model.m, -1)[:, mask]
        # envelope is monotone in y0, so solve on a coarse y0 ladder and interpolate
        y0s = np.unique(np.concatenate([phis[order][:: max(1, len(order) // 64)], phis[order][-1:]]))
        env = np.array([ode_comparison_envelope(h, c0, y0, delta) for y0 in y0s])
        bound_at = np.interp(phis, y0s, env)
        ratio = vals / bound_at[None, :]
        k, p = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[k, p] > measured:
            measured = float(ratio[k, p])
            wit = [{"t": rec.t, "x": [float(v) for v in pts[p]], "k": int(k), "value": measured}]
    return _verdict("ode_envelope", measured, 1.0, tol, "rel", witnesses=wit, constants={"c0": c0})


# ---------------------------------------------------------------------------
# L2 / Lp machinery

@dataclass
class GammaCertificate:
    Gamma: float
    certified: bool
    kappa_C: Callable[[float, np.ndarray], float]
    div_gamma: Callable[[int, float, np.ndarray], float]
    witness: Optional[dict] = None


def _fd_div_gamma(model: CoefficientModel, k: int, t: float, x: np.ndarray) -> float:
    """div(b^k - div-rows of Q^k) by central differences."""
    d = model.d
    out = 0.0
    for i in range(d):
        h = 1e-5 * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out += (model.drift(k, t, xp)[i] - model.drift(k, t, xm)[i]) / (2 * h)
        for j in range(d):
            hj = 1e-5 * (1.0 + abs(x[j]))
            # D_ij q_ij via nested central differences
            def dq(y):
                yp, ym = y.copy(), y.copy()
                yp[j] += hj
                ym[j] -= hj
                return (model.diffusion(k, t, yp)[i, j] - model.diffusion(k, t, ym)[i, j]) / (2 * hj)

            out -= (dq(xp) - dq(xm)) / (2 * h)
    return out


def compute_gamma(
    model: CoefficientModel,
    interval: tuple[float, float],
    sample_box: float,
    n_samples: int = 512,
    seed: int = 0,
) -> GammaCertificate:
    """Gamma = sup(2 kappa_C - min_k div gamma^k), with kappa_C bounding the
    coupling quadratic form.  Polynomial models certify finiteness from the
    exponent tables and the box is grown until the sup detaches from the
    outer shell; a sup stuck on the shell is a divergence witness and the
    certificate is refused."""
    t0, t1 = interval
    ts = np.linspace(t0, t1, 9) if t1 > t0 else np.array([t0])
    spec = model.poly
    certified = False
    if spec is not None:
        rep = check_exponent_conditions(spec)
        certified = rep.ok("lp_invariance_condition")

    if spec is not None:

        def kappa_C(t, x):
            u = 1.0 + float(np.dot(x, x))
            dvals = np.array([[spec.dmat[i][j](t) for j in range(model.m)] for i in range(model.m)])
            diag_part = max(dvals[i, i] * u ** spec.sigma_exp[i, i] for i in range(model.m))
            off = dvals.copy()
            np.fill_diagonal(off, 0.0)
            lam = float(np.linalg.eigvalsh(0.5 * (off + off.T))[-1])
            smax = float(max((spec.sigma_exp[i, j] for i in range(model.m) for j in range(model.m) if i != j), default=0.0))
            return diag_part + max(lam, 0.0) * u**smax

    else:

        def kappa_C(t, x):
            C = np.asarray(model.coupling(t, x), dtype=float)
            return float(np.linalg.eigvalsh(0.5 * (C + C.T))[-1])

    if model.derivatives is not None:
        div_gamma = model.derivatives.div_gamma
    else:
        div_gamma = lambda k, t, x: _fd_div_gamma(model, k, t, x)

    def expr(t, x):
        return 2.0 * kappa_C(t, x) - min(div_gamma(k, t, x) for k in range(model.m))

    box = float(sample_box)
    witness, vmax = None, -math.inf
    for attempt in range(4):
        xs = sample_points(box, model.d, n_samples, seed)
        radii = np.linalg.norm(xs, axis=1)
        vals = np.array([[expr(t, x) for x in xs] for t in ts])
        imax = np.unravel_index(np.argmax(vals), vals.shape)
        vmax = float(vals[imax])
        witness = {"t": float(ts[imax[0]]), "x": [float(v) for v in xs[imax[1]]], "value": vmax}
        shell = radii >= 0.85 * box
        max_outer = float(vals[:, shell].max()) if shell.any() else -math.inf
        max_inner = float(vals[:, ~shell].max()) if (~shell).any() else -math.inf
        growing = max_outer > max_inner + 1e-9 * (abs(vmax) + 1.0)
        if not growing:
            return GammaCertificate(Gamma=vmax, certified=certified, kappa_C=kappa_C, div_gamma=div_gamma, witness=witness)
        if spec is not None and not certified:
            break
        box *= 2.0
    if spec is not None and certified:
        # exponent-certified finite: the last doubled box carries the sup
        return GammaCertificate(Gamma=vmax, certified=True, kappa_C=kappa_C, div_gamma=div_gamma, witness=witness)
    raise CertificateError("Gamma diverges along the sample box; Lp invariance not certified", witness=witness)


def _lp_norm_grid(rec_values: np.ndarray, m: int, weights: np.ndarray, p: float) -> float:
    comps = rec_values.reshape(m, -1)
    return float(np.sum(np.abs(comps) ** p * weights[None, :]) ** (1.0 / p))


def check_L2_estimate(f: StateField, records, Gamma: float, tol: float = 1e-2) -> PropertyVerdict:
    """Squared-L2 growth controlled by e^{Gamma (t-s)} on the Dirichlet box."""
    if not math.isfinite(Gamma):
        raise CertificateError("finite Gamma required")
    m = records[0].m
    w = records[0].dom.cell_volumes()
    fn = _lp_norm_grid(f.values, m, w, 2.0) ** 2
    if fn == 0.0:
        raise ValueError("zero initial datum")
    measured, wit = -math.inf, []
    for rec in records:
        ratio = _lp_norm_grid(rec.values, m, w, 2.0) ** 2 * math.exp(-Gamma * (rec.t - f.t)) / fn
        if ratio > measured:
            measured, wit = ratio, [{"t": rec.t, "value": ratio}]
    return _verdict("l2_estimate", measured, 1.0, tol, "rel", witnesses=wit, constants={"gamma_ab": Gamma})


def lp_growth_bound(p: float, K: float, Gamma: float, r: float) -> float:
    """c_p(r) for p >= 2, interpolating the sup and L2 envelopes."""
    return math.exp((K * (1.0 - 2.0 / p) + Gamma / p) * r)


def check_lp_estimate(f: StateField, records, p: float, K: float, Gamma: float, tol: float = 1e-2) -> PropertyVerdict:
    if p < 2:
        raise ValueError("the direct route covers p >= 2 only")
    m = records[0].m
    w = records[0].dom.cell_volumes()
    fn = _lp_norm_grid(f.values, m, w, p)
    if fn == 0.0:
        raise ValueError("zero initial datum")
    measured, wit = -math.inf, []
    for rec in records:
        ratio = _lp_norm_grid(rec.values, m, w, p) / (fn * lp_growth_bound(p, K, Gamma, rec.t - f.t))
        if ratio > measured:
            measured, wit = ratio, [{"t": rec.t, "value": ratio}]
    return _verdict("lp_estimate", measured, 1.0, tol, "rel", witnesses=wit, constants={"p": p, "K": K, "gamma_ab": Gamma})


# ---------------------------------------------------------------------------
# gradient estimate

def gradient_sigma_certificate(
    model: CoefficientModel,
    interval: tuple[float, float],
    sample_box: float,
    n_samples: int = 400,
    gamma_kJ: float = 1.0,
    seed: int = 0,
):
    """sigma_{k,J} per component, with the standard free choices.

    alpha_{k,J} is set to max(d^2 c^2 / 4, 1) so the ellipticity term is
    nonpositive, gamma_{k,J} defaults to 1, and the coupling growth
    functions are the pointwise |c_hk| and |grad c| themselves.  For
    polynomial models finiteness must be certified by the exponent
    condition first; generic models fail when the sampled expression keeps
    growing on the shell.
    """
    spec = model.poly
    exp_certified = False
    if spec is not None:
        rep = check_exponent_conditions(spec)
        exp_certified = rep.ok("gradient_bound_condition")
    t0, t1 = interval
    ts = np.linspace(t0, t1, 7) if t1 > t0 else np.array([t0])
    xs = sample_points(sample_box, model.d, n_samples, seed)
    radii = np.linalg.norm(xs, axis=1)
    d, m = model.d, model.m

    sigmas, alphas, c_consts = [], [], []
    for k in range(m):
        c_const = 0.0
        entries = []
        for t in ts:
            for x, rad in zip(xs, radii):
                Q = np.asarray(model.diffusion(k, t, x), dtype=float)
                mu = float(np.linalg.eigvalsh(Q)[0])
                if model.derivatives is not None:
                    qg = np.asarray(model.derivatives.q_grad(k, t, x), dtype=float)
                    bj = np.asarray(model.derivatives.b_jac(k, t, x), dtype=float)
                    cg = np.asarray(model.derivatives.c_grad(t, x), dtype=float)
                else:
                    qg = _fd_q_grad(model, k, t, x)
                    bj = _fd_b_jac(model, k, t, x)
                    cg = _fd_c_grad(model, t, x)
                c_const = max(c_const, float(np.max(np.abs(qg))) / mu)
                rk = float(np.linalg.eigvalsh(0.5 * (bj + bj.T))[-1])
                C = np.asarray(model.coupling(t, x), dtype=float)
                rho0 = max((abs(C[h, k]) for h in range(m) if h != k), default=0.0)
                rho1 = float(np.max(np.linalg.norm(cg, axis=2)))
                ckk = float(C[k, k])
                entries.append((rad, mu, rk, ckk, rho0, rho1))
        alpha = max(d * d * c_const * c_const / 4.0, 1.0)
        max_inner, max_outer = -math.inf, -math.inf
        for (rad, mu, rk, ckk, rho0, rho1) in entries:
            val = (d * d * c_const * c_const / 4.0 - alpha) * mu + rk + ckk + gamma_kJ * (rho0**2 + rho1**2)
            if rad >= 0.85 * sample_box:
                max_outer = max(max_outer, val)
            else:
                max_inner = max(max_inner, val)
        worst = max(max_inner, max_outer)
        growing = max_outer > max_inner + 1e-9 * (abs(worst) + 1.0)
        if not exp_certified and growing:
            raise CertificateError(
                f"sigma_{k} keeps growing on the sample shell; no finite certificate",
                witness={"k": k, "value": worst},
            )
        sigmas.append(worst)
        alphas.append(alpha)
        c_consts.append(c_const)
    return sigmas, {"alpha": max(alphas), "gamma_kJ": gamma_kJ, "c": max(c_consts)}


def _fd_q_grad(model, k, t, x):
    d = model.d
    out = np.zeros((d, d, d))
    for l in range(d):
        h = 1e-5 * (1.0 + abs(x[l]))
        xp, xm = x.copy(), x.copy()
        xp[l] += h
        xm[l] -= h
        out[l] = (np.asarray(model.diffusion(k, t, xp)) - np.asarray(model.diffusion(k, t, xm))) / (2 * h)
    return out


def _fd_b_jac(model, k, t, x):
    d = model.d
    out = np.zeros((d, d))
    for j in range(d):
        h = 1e-5 * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        out[:, j] = (np.asarray(model.drift(k, t, xp)) - np.asarray(model.drift(k, t, xm))) / (2 * h)
    return out


def _fd_c_grad(model, t, x):
    d, m = model.d, model.m
    out = np.zeros((m, m, d))
    for l in range(d):
        h = 1e-5 * (1.0 + abs(x[l]))
        xp, xm = x.copy(), x.copy()
        xp[l] += h
        xm[l] -= h
        out[:, :, l] = (np.asarray(model.coupling(t, xp)) - np.asarray(model.coupling(t, xm))) / (2 * h)
    return out


def gradient_bound_constant(sigmas, consts, m: int, K: float, horizon: float) -> float:
    """Assemble the Gronwall constant of the gradient estimate.

    With c0 = max_k sigma_k, C1 = sum_k m / (4 gamma_k), the chain gives
    |J u(t)|^2 <= E max(alpha + C1 I_K(T), 1) ||f||_C1^2 e^{E C1 T} with
    E = e^{c0^+ T}; the returned value is the square root of that factor.
    """
    c0 = max(sigmas)
    gamma_kJ = consts["gamma_kJ"]
    alpha = consts["alpha"]
    C1 = m * m / (4.0 * gamma_kJ)
    E = math.exp(max(c0, 0.0) * horizon)
    I_K = (math.expm1(2.0 * K * horizon) / (2.0 * K)) if K > 0 else horizon
    factor = E * max(alpha + C1 * I_K, 1.0) * math.exp(E * C1 * horizon)
    return math.sqrt(factor)


def _sup_gradient(rec: StateField, m: int, mask: np.ndarray) -> float:
    """Discrete sup of the Jacobian Frobenius norm on the inner window."""
    dom = rec.dom
    N, d = dom.N, dom.d
    total = np.zeros(dom.npts)
    for k in range(m):
        comp = rec.component(k)
        if d == 1:
            g = np.gradient(comp, dom.dx)
            total += g**2
        else:
            grid = comp.reshape(N, N)
            gx, gy = np.gradient(grid, dom.dx)
            total += (gx**2 + gy**2).ravel()
    return float(np.sqrt(np.max(total[mask])))


def check_gradient_bound(
    model: CoefficientModel,
    dom: DiscreteDomain,
    f_value,
    f_gradient,
    window: tuple[float, float],
    record_times,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
    sigma_cert=None,
    K: Optional[float] = None,
    ratio_tol: float = 1.1,
) -> PropertyVerdict:
    """Uniform gradient bound: the measured sup gradient must be stable
    under grid refinement and sit below the Gronwall constant."""
    s, T = window
    if sigma_cert is None:
        sigma_cert = gradient_sigma_certificate(model, (s, T), dom.L)
    sigmas, consts = sigma_cert
    if K is None:
        from evosys.solver import compute_Kbar

        _, K = compute_Kbar(model, dom.L, [s, T])
    dt = dt if dt is not None else dom.dx

    def run(this_dom, this_dt):
        f = grid_field(this_dom, model.m, f_value, t=s)
        cfg = EvolveConfig(s=s, t_end=max(record_times), dt=this_dt, scheme=scheme, record_times=tuple(record_times))
        recs = evolve(model, this_dom, cfg, f, upwind=upwind)
        mask = this_dom.inner_mask()
        return max(_sup_gradient(r, model.m, mask) for r in recs)

    coarse = run(dom, dt)
    fine_dom = DiscreteDomain(dom.d, dom.L, 2 * dom.N - 1, dom.bc)
    fine = run(fine_dom, dt / 2.0)

    # C1 norm of the data from the supplied values and gradients
    fsup2, gsup2 = 0.0, 0.0
    for x in dom.points[dom.inner_mask()]:
        v = np.atleast_1d(np.asarray(f_value(x), dtype=float))
        g = np.atleast_2d(np.asarray(f_gradient(x), dtype=float))
        fsup2 = max(fsup2, float(np.max(v**2)))
        gsup2 = max(gsup2, float(np.max(np.sum(g**2, axis=1))))
    fc1 = math.sqrt(model.m * (fsup2 + gsup2))
    floor = 1e-10 * max(fc1, 1.0)  # both grids at numerical zero: stable by fiat
    ratio = 1.0 if max(fine, coarse) <= floor else fine / max(coarse, floor)
    ctilde = gradient_bound_constant(sigmas, consts, model.m, K, T - s)
    bound = ctilde * fc1
    passed_ratio = ratio <= ratio_tol
    v = _verdict(
        "gradient_bound",
        fine,
        bound,
        0.0,
        "rel",
        witnesses=[{"two_grid_ratio": ratio}],
        constants={"sigma_kJ": [float(x) for x in sigmas], "c_tilde": ctilde, "ratio": ratio, "K": K},
    )
    v.passed = bool(v.passed and passed_ratio)
    return v


# ---------------------------------------------------------------------------
# C0 behavior

def check_c0_behavior(
    model: CoefficientModel,
    dom: DiscreteDomain,
    mode: str,
    aux: dict,
    dt: Optional[float] = None,
    scheme: str = "implicit-euler",
    upwind: Optional[bool] = None,
) -> PropertyVerdict:
    """Preservation (or certified failure of preservation) of decay at infinity.

    mode="preserve": aux carries (v, lam0, f_value, support_radius, t_list);
    the barrier inequality lam0 v - A(t) v >= 0 is certified on samples and
    the evolved field must sit under e^{lam0 (t-s)} ||f|| v / delta outside
    the support.  mode="not-preserve": aux carries (c0, R, n, t); the evolved
    ramp approximant of the ball indicator must stay above c0/2 everywhere
    on the window.
    """
    dt = dt if dt is not None else dom.dx
    mask = dom.inner_mask()
    if mode == "preserve":
        v: VectorC2 = aux["v"]
        lam0 = float(aux["lam0"])
        s = float(aux.get("s", 0.0))
        t_list = list(aux["t_list"])
        f_value = aux["f_value"]
        rsupp = float(aux["support_radius"])
        from evosys.coefficients import eval_operator

        for t in np.linspace(s, max(t_list), 5):
            for x in sample_points(dom.L, model.d, 128, seed=3):
                gap = lam0 * np.asarray(v.value(x)) - eval_operator(model, v, float(t), x)
                if np.min(gap) < 0:
                    raise CertificateError(
                        "barrier certificate fails on samples",
                        witness={"t": float(t), "x": [float(c) for c in x], "value": float(np.min(gap))},
                    )
        f = grid_field(dom, model.m, f_value, t=s)
        fnorm = vector_sup_norm(f.values, model.m, mask)
        vgrid = np.array([v.value(x) for x in dom.points])  # (npts, m)
        supp = dom.radii() <= rsupp
        delta = float(np.min(vgrid[supp], axis=0).min())
        cfg = EvolveConfig(s=s, t_end=max(t_list), dt=dt, scheme=scheme, record_times=tuple(t_list))
        records = evolve(model, dom, cfg, f, upwind=upwind)
        outer = mask & (dom.radii() >= rsupp)
        measured, wit = -math.inf, []
        for rec in records:
            env = math.exp(lam0 * (rec.t - s)) / delta * fnorm * vgrid[outer].T  # (m, n_outer)
            vals = np.abs(rec.values.reshape(model.m, -1)[:, outer])
            exceed = float(np.max(vals - env))
            if exceed > measured:
                measured = exceed
                wit = [{"t": rec.t, "value": exceed}]
        return _verdict(
            "c0_preserve", measured, 0.0, 1e-8, "abs", witnesses=wit, constants={"lam0": lam0, "delta": delta}
        )
    if mode == "not-preserve":
        from evosys.kernels import smooth_indicator

        c0 = float(aux["c0"])
        if c0 <= 0:
            raise CertificateError("positive c0 certificate required")
        R = float(aux["R"])
        n = int(aux.get("n", 64))
        s = float(aux.get("s", 0.0))
        t = float(aux["t"])
        theta = smooth_indicator(dom, ("ball", np.zeros(dom.d), R), n)
        f = StateField(dom, model.m, np.tile(theta, model.m), s)
        cfg = EvolveConfig(s=s, t_end=t, dt=dt, scheme=scheme, record_times=(t,))
        (rec,) = evolve(model, dom, cfg, f, upwind=upwind)
        low = float(np.min(rec.values.reshape(model.m, -1)[:, mask]))
        return _verdict(
            "c0_not_preserved",
            c0 / 2.0 - low,
            0.0,
            0.0,
            "abs",
            witnesses=[{"t": t, "min_value": low}],
            constants={"c0": c0, "R": R},
        )
    raise ValueError(f"unknown mode {mode!r}")
