"""Coefficient models for weakly coupled second-order systems.

A model supplies, for each component k, a diffusion matrix Q^k(t,x), a drift
b^k(t,x), and a shared zero-order coupling matrix C(t,x).  The concrete
polynomial family

    q_ij^k = omega_ij^k(t) (1+|x|^2)^{h_ij^k}
    b_i^k  = -gamma_i^k(t) x_i (1+|x|^2)^{l_i^k}
    c_hk   = d_hk(t) (1+|x|^2)^{sigma_hk}

admits exact growth-order reasoning, so its hypothesis checks come back
"certified"/"refuted" rather than merely sampled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from evosys.errors import CertificateError
from evosys.timefn import TimeFn, const, timefn_sum
from evosys.util import sample_points

Array = np.ndarray

VANISH_TOL = 1e-14  # max sampled |c_jk| below this counts as identically zero
SYM_TOL = 1e-12


# ---------------------------------------------------------------------------
# function-with-derivatives containers

@dataclass(frozen=True)
class ScalarC2:
    """Scalar C^2 function given with gradient and Hessian evaluators."""

    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]

    def times_ones(self, m: int) -> "VectorC2":
        return VectorC2(
            m=m,
            value=lambda x: np.full(m, self.value(x)),
            gradient=lambda x: np.tile(self.gradient(x), (m, 1)),
            hessian=lambda x: np.tile(self.hessian(x), (m, 1, 1)),
        )


@dataclass(frozen=True)
class VectorC2:
    """Vector C^2 function; value (m,), gradient (m,d), hessian (m,d,d)."""

    m: int
    value: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]


def phi_quadratic(d: int) -> ScalarC2:
    """The standard Lyapunov candidate phi(x) = 1 + |x|^2."""
    return ScalarC2(
        value=lambda x: 1.0 + float(np.dot(x, x)),
        gradient=lambda x: 2.0 * np.asarray(x, dtype=float),
        hessian=lambda x: 2.0 * np.eye(d),
    )


# ---------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class ModelDerivatives:
    """Exact spatial derivatives, when the model can supply them."""

    q_grad: Callable[[int, float, Array], Array]  # (k,t,x) -> (d,d,d), [l,i,j] = D_l q_ij
    b_jac: Callable[[int, float, Array], Array]  # (k,t,x) -> (d,d), [i,j] = D_j b_i
    div_gamma: Callable[[int, float, Array], float]  # div of b^k_i - sum_j D_j q_ij^k
    c_grad: Callable[[float, Array], Array]  # (t,x) -> (m,m,d)


@dataclass(frozen=True)
class PolynomialModelSpec:
    """Exponent/coefficient tables of the polynomial family.

    omega[k][i][j], gamma[k][i], dmat[h][k] are TimeFn; the exponent tables
    are nonnegative floats.  `interval` is the working time interval over
    which certified verdicts are computed.
    """

    d: int
    m: int
    omega: tuple  # m-tuple of (d,d) TimeFn grids
    h_exp: Array  # (m,d,d)
    gamma: tuple  # m-tuple of d-tuples of TimeFn
    ell_exp: Array  # (m,d)
    dmat: tuple  # (m,m) TimeFn grid
    sigma_exp: Array  # (m,m)
    interval: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        h = np.asarray(self.h_exp, dtype=float)
        ell = np.asarray(self.ell_exp, dtype=float)
        sig = np.asarray(self.sigma_exp, dtype=float)
        object.__setattr__(self, "h_exp", h)
        object.__setattr__(self, "ell_exp", ell)
        object.__setattr__(self, "sigma_exp", sig)
        if h.shape != (self.m, self.d, self.d) or ell.shape != (self.m, self.d):
            raise ValueError("exponent table shape mismatch")
        if sig.shape != (self.m, self.m):
            raise ValueError("sigma exponent table shape mismatch")
        if np.any(h < 0) or np.any(ell < 0) or np.any(sig < 0):
            raise ValueError("exponents must be nonnegative")
        for k in range(self.m):
            for i in range(self.d):
                for j in range(i + 1, self.d):
                    if self.omega[k][i][j] != self.omega[k][j][i]:
                        raise ValueError(f"omega^{k} not symmetric at ({i},{j})")
                    if h[k, i, j] != h[k, j, i]:
                        raise ValueError(f"h^{k} not symmetric at ({i},{j})")
        t0, t1 = self.interval
        for k in range(self.m):
            for i in range(self.d):
                if self.gamma[k][i].inf(t0, t1) <= 0:
                    raise ValueError(f"inf gamma_{i}^{k} over the interval is not positive")

    @property
    def autonomous(self) -> bool:
        fns = [f for row in self.omega for col in row for f in col]
        fns += [f for row in self.gamma for f in row]
        fns += [f for row in self.dmat for f in row]
        return all(f.is_constant for f in fns)

    def tau(self, k: int) -> float:
        """tau_k = max_i {sigma_kk, l_i^k}; positive tau drives compactness."""
        return max(float(self.sigma_exp[k, k]), float(np.max(self.ell_exp[k])))


@dataclass(frozen=True)
class CoefficientModel:
    """Evaluator bundle (Q^k, b^k, C) defining the operator A(t)."""

    d: int
    m: int
    diffusion: Callable[[int, float, Array], Array]
    drift: Callable[[int, float, Array], Array]
    coupling: Callable[[float, Array], Array]
    autonomous: bool = False
    poly: Optional[PolynomialModelSpec] = None
    derivatives: Optional[ModelDerivatives] = None
    name: str = "custom"

    def component_scalar(self, k: int, include_ckk: bool = True) -> "CoefficientModel":
        """Scalar (m=1) model with generator A_k (+ c_kk if requested)."""
        if include_ckk:
            coup = lambda t, x: self.coupling(t, x)[k, k].reshape(1, 1)
        else:
            coup = lambda t, x: np.zeros((1, 1))
        return CoefficientModel(
            d=self.d,
            m=1,
            diffusion=lambda _k, t, x: self.diffusion(k, t, x),
            drift=lambda _k, t, x: self.drift(k, t, x),
            coupling=coup,
            autonomous=self.autonomous,
            name=f"{self.name}[k={k}]",
        )


def eval_operator(model: CoefficientModel, psi: VectorC2, t: float, x: Array) -> Array:
    """Apply the operator at a point: trace term + drift term + coupling."""
    if psi.m != model.m:
        raise ValueError(f"psi has {psi.m} components, model has {model.m}")
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"point has shape {x.shape}, expected ({model.d},)")
    vals = np.asarray(psi.value(x), dtype=float)
    grads = np.asarray(psi.gradient(x), dtype=float)
    hesss = np.asarray(psi.hessian(x), dtype=float)
    out = np.empty(model.m)
    C = np.asarray(model.coupling(t, x), dtype=float)
    for k in range(model.m):
        Q = np.asarray(model.diffusion(k, t, x), dtype=float)
        b = np.asarray(model.drift(k, t, x), dtype=float)
        out[k] = float(np.sum(Q * hesss[k])) + float(b @ grads[k]) + float(C[k] @ vals)
    return out


def eval_scalar_part(model: CoefficientModel, k: int, f: ScalarC2, t: float, x: Array) -> float:
    """A_k(t) f at a point, i.e. the operator without the coupling term."""
    x = np.asarray(x, dtype=float)
    Q = np.asarray(model.diffusion(k, t, x), dtype=float)
    b = np.asarray(model.drift(k, t, x), dtype=float)
    return float(np.sum(Q * f.hessian(x))) + float(b @ f.gradient(x))


# ---------------------------------------------------------------------------
# polynomial family construction

def build_polynomial_model(spec: PolynomialModelSpec) -> CoefficientModel:
    """Instantiate evaluators for the polynomial family, including exact
    first/second spatial derivatives for the divergence computations."""
    d, m = spec.d, spec.m
    h, ell, sig = spec.h_exp, spec.ell_exp, spec.sigma_exp

    def diffusion(k, t, x):
        u = 1.0 + float(np.dot(x, x))
        Q = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                Q[i, j] = spec.omega[k][i][j](t) * u ** h[k, i, j]
        return Q

    def drift(k, t, x):
        u = 1.0 + float(np.dot(x, x))
        return np.array([-spec.gamma[k][i](t) * x[i] * u ** ell[k, i] for i in range(d)])

    def coupling(t, x):
        u = 1.0 + float(np.dot(x, x))
        C = np.empty((m, m))
        for a in range(m):
            for b_ in range(m):
                C[a, b_] = spec.dmat[a][b_](t) * u ** sig[a, b_]
        return C

    def q_grad(k, t, x):
        u = 1.0 + float(np.dot(x, x))
        G = np.zeros((d, d, d))
        for i in range(d):
            for j in range(d):
                hij = h[k, i, j]
                if hij == 0.0:
                    continue
                w = spec.omega[k][i][j](t) * hij * u ** (hij - 1.0)
                for l in range(d):
                    G[l, i, j] = w * 2.0 * x[l]
        return G

    def b_jac(k, t, x):
        u = 1.0 + float(np.dot(x, x))
        J = np.zeros((d, d))
        for i in range(d):
            g = spec.gamma[k][i](t)
            li = ell[k, i]
            for j in range(d):
                J[i, j] = -g * (
                    (u**li if i == j else 0.0)
                    + (x[i] * li * u ** (li - 1.0) * 2.0 * x[j] if li != 0.0 else 0.0)
                )
        return J

    def div_gamma(k, t, x):
        u = 1.0 + float(np.dot(x, x))
        total = 0.0
        for i in range(d):
            g = spec.gamma[k][i](t)
            li = ell[k, i]
            total += -g * (u**li + (2.0 * li * x[i] ** 2 * u ** (li - 1.0) if li else 0.0))
        for i in range(d):
            for j in range(d):
                hij = h[k, i, j]
                if hij == 0.0:
                    continue
                w = spec.omega[k][i][j](t)
                total -= w * (4.0 * hij * (hij - 1.0) * u ** (hij - 2.0) * x[i] * x[j])
                if i == j:
                    total -= w * 2.0 * hij * u ** (hij - 1.0)
        return total

    def c_grad(t, x):
        u = 1.0 + float(np.dot(x, x))
        G = np.zeros((m, m, d))
        for a in range(m):
            for b_ in range(m):
                s = sig[a, b_]
                if s == 0.0:
                    continue
                G[a, b_] = spec.dmat[a][b_](t) * s * u ** (s - 1.0) * 2.0 * np.asarray(x)
        return G

    return CoefficientModel(
        d=d,
        m=m,
        diffusion=diffusion,
        drift=drift,
        coupling=coupling,
        autonomous=spec.autonomous,
        poly=spec,
        derivatives=ModelDerivatives(q_grad, b_jac, div_gamma, c_grad),
        name="polynomial",
    )


# ---------------------------------------------------------------------------
# hypothesis reports

@dataclass
class HypothesisCheck:
    name: str
    verdict: str  # certified | refuted | sampled-pass | sampled-fail
    witnesses: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict in ("certified", "sampled-pass")


@dataclass
class HypothesisReport:
    model_name: str
    checks: list = field(default_factory=list)

    def add(self, check: HypothesisCheck) -> None:
        if check.verdict == "refuted" and not check.witnesses:
            raise ValueError(f"refuted check {check.name!r} must carry a witness")
        self.checks.append(check)

    def get(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def ok(self, name: str) -> bool:
        return self.get(name).ok

    def all_ok(self, names=None) -> bool:
        names = names if names is not None else [c.name for c in self.checks]
        return all(self.ok(n) for n in names)

    def constants_flat(self) -> dict:
        out = {}
        for c in self.checks:
            out.update(c.constants)
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "checks": [
                {
                    "name": c.name,
                    "verdict": c.verdict,
                    "witnesses": c.witnesses,
                    "constants": c.constants,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _witness(t, x, value, **extra) -> dict:
    w = {"t": float(t), "x": [float(v) for v in np.atleast_1d(x)], "value": float(value)}
    w.update(extra)
    return w


# ---------------------------------------------------------------------------
# exact growth-order helpers for the polynomial family

def _sigma_groups(spec: PolynomialModelSpec, row: int):
    """Row coupling as groups {exponent: summed TimeFn}, zero groups dropped."""
    groups: dict[float, list[TimeFn]] = {}
    for k in range(spec.m):
        groups.setdefault(float(spec.sigma_exp[row, k]), []).append(spec.dmat[row][k])
    out = {}
    for v, fns in groups.items():
        s = timefn_sum(fns)
        if not s.is_zero:
            out[v] = s
    return out


def poly_offdiag_inf(spec: PolynomialModelSpec, i: int, j: int):
    """inf over I x R^d of c_ij.  Returns (value, certified) or raises
    CertificateError when the entry is unbounded below."""
    t0, t1 = spec.interval
    fn = spec.dmat[i][j]
    lo, _ = fn.bounds(t0, t1)
    s = float(spec.sigma_exp[i, j])
    if s == 0.0 or lo >= 0.0:
        return lo, True
    raise CertificateError(
        f"coupling entry c_{i}{j} is unbounded below (negative coefficient, exponent {s})",
        witness=_witness(t0, np.zeros(spec.d), lo, entry=[i, j]),
    )


def poly_rowsum_sup(spec: PolynomialModelSpec, row: int):
    """sup over I x R^d of the coupling row sum.

    Returns (sup, certified).  sup = +inf with certified=True means the row
    sum is certifiably unbounded above.  certified=False asks the caller to
    fall back to sampling.
    """
    t0, t1 = spec.interval
    groups = _sigma_groups(spec, row)
    if not groups:
        return 0.0, True
    exps = sorted(groups, reverse=True)
    vtop = exps[0]
    lo_top, hi_top = groups[vtop].bounds(t0, t1)
    if vtop == 0.0:
        # single flat group: everything collapsed to a bounded function of t
        return hi_top, True
    if hi_top > 0.0:
        return math.inf, True
    if hi_top == 0.0:
        return math.nan, False
    # negative leading coefficient: find u* past which the row sum is negative
    rest = [(v, max(abs(b) for b in groups[v].bounds(t0, t1))) for v in exps[1:]]
    u_star = 1.0
    for _ in range(200):
        tail = sum(a * u_star**v for v, a in rest)
        if abs(hi_top) * u_star**vtop >= 2.0 * tail or not rest:
            break
        u_star *= 2.0
    ts = np.linspace(t0, t1, 129) if t0 != t1 else np.array([t0])
    us = np.geomspace(1.0, max(u_star, 1.0 + 1e-12), 512)
    sup = -math.inf
    for t in ts:
        coeffs = {v: groups[v](t) for v in exps}
        vals = sum(c * us**v for v, c in coeffs.items())
        sup = max(sup, float(np.max(vals)))
    h = (t1 - t0) / max(len(ts) - 1, 1)
    slack = sum(groups[v].deriv_bound(t0, t1) * u_star**v for v in exps) * h / 2.0
    return sup + slack, True


def poly_min_eig_lower(spec: PolynomialModelSpec, k: int):
    """Certified positive lower bound for the smallest eigenvalue of Q^k,
    via the Gershgorin-style nu_k when the exponent pattern allows it.

    Returns (nu_k, certified)."""
    t0, t1 = spec.interval
    d = spec.d
    h = spec.h_exp[k]
    if d == 1:
        lo, _ = spec.omega[k][0][0].bounds(t0, t1)
        return lo, lo > 0
    min_hii = min(h[i, i] for i in range(d))
    max_hij = max((h[i, j] for i in range(d) for j in range(d) if i != j), default=0.0)
    if min_hii < max_hij:
        return math.nan, False
    ts = np.linspace(t0, t1, 257)
    vals = []
    for t in ts:
        dmin = min(spec.omega[k][i][i](t) for i in range(d))
        off = max(
            math.sqrt(sum(spec.omega[k][i][j](t) ** 2 for j in range(d) if j != i))
            for i in range(d)
        )
        vals.append(dmin - off)
    lip = sum(
        spec.omega[k][i][j].deriv_bound(t0, t1) for i in range(d) for j in range(d)
    )
    nu = min(vals) - lip * (t1 - t0) / (len(ts) - 1) / 2.0
    return nu, nu > 0


# ---------------------------------------------------------------------------
# checkers

def _min_eig(Q: Array) -> float:
    return float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])


def check_structural_hypotheses(
    model: CoefficientModel,
    sample_box: float,
    sample_times,
    n_samples: int,
    seed: int = 0,
) -> HypothesisReport:
    """Ellipticity, off-diagonal sign/lower bounds and row-sum bounds of C.

    Polynomial models get exact verdicts from the growth orders; generic
    models are sampled on the box.
    """
    if n_samples < 1 or len(list(sample_times)) == 0:
        raise ValueError("empty sample set")
    ts = [float(t) for t in sample_times]
    xs = sample_points(sample_box, model.d, n_samples, seed)
    rep = HypothesisReport(model.name)
    spec = model.poly

    # -- ellipticity
    mu0 = [math.inf] * model.m
    worst = [None] * model.m
    for t in ts:
        for x in xs:
            for k in range(model.m):
                Q = np.asarray(model.diffusion(k, t, x), dtype=float)
                if np.max(np.abs(Q - Q.T)) > SYM_TOL:
                    raise ValueError(f"diffusion Q^{k} not symmetric at t={t}, x={x}")
                ev = _min_eig(Q)
                if ev < mu0[k]:
                    mu0[k], worst[k] = ev, (t, x, ev)
    ell_ok = all(v > 0 for v in mu0)
    nu_vals, nu_cert = [], True
    if spec is not None:
        for k in range(model.m):
            nu, cert = poly_min_eig_lower(spec, k)
            nu_vals.append(nu)
            nu_cert = nu_cert and cert
    if spec is not None and nu_cert and all(v > 0 for v in nu_vals):
        verdict = "certified"
    elif not ell_ok:
        verdict = "refuted"
    else:
        verdict = "sampled-pass"
    rep.add(
        HypothesisCheck(
            "ellipticity",
            verdict,
            witnesses=[] if ell_ok else [_witness(*worst[k], k=k) for k in range(model.m) if mu0[k] <= 0],
            constants={"mu0": [float(v) for v in mu0], **({"nu": [float(v) for v in nu_vals]} if nu_vals else {})},
        )
    )

    # -- coupling samples, reused by the three C checks
    Cs = np.array([[np.asarray(model.coupling(t, x), dtype=float) for x in xs] for t in ts])

    # off-diagonal entries: bounded below (Hyp on C rows) and nonnegative
    off_min, off_wit = math.inf, None
    for a in range(model.m):
        for b in range(model.m):
            if a == b:
                continue
            idx = np.unravel_index(np.argmin(Cs[:, :, a, b]), Cs.shape[:2])
            v = Cs[idx[0], idx[1], a, b]
            if v < off_min:
                off_min, off_wit = v, (ts[idx[0]], xs[idx[1]], v, (a, b))
    if model.m == 1:
        off_min, off_wit = 0.0, None

    if spec is not None:
        try:
            lows = [
                poly_offdiag_inf(spec, i, j)[0]
                for i in range(model.m)
                for j in range(model.m)
                if i != j
            ]
            lo = min(lows) if lows else 0.0
            rep.add(HypothesisCheck("offdiag_lower", "certified", constants={"offdiag_inf": lo}))
            rep.add(
                HypothesisCheck(
                    "offdiag_nonneg",
                    "certified" if lo >= 0 else "refuted",
                    witnesses=[] if lo >= 0 else [_witness(ts[0], xs[0], lo)],
                    constants={"offdiag_inf": lo},
                )
            )
        except CertificateError as err:
            rep.add(HypothesisCheck("offdiag_lower", "refuted", witnesses=[err.witness]))
            rep.add(HypothesisCheck("offdiag_nonneg", "refuted", witnesses=[err.witness]))
    else:
        rep.add(
            HypothesisCheck(
                "offdiag_lower",
                "sampled-pass",
                constants={"offdiag_inf": float(off_min)},
                detail="boundedness below cannot be refuted from samples",
            )
        )
        ok = off_min >= -VANISH_TOL
        rep.add(
            HypothesisCheck(
                "offdiag_nonneg",
                "sampled-pass" if ok else "refuted",
                witnesses=[] if ok else [_witness(off_wit[0], off_wit[1], off_wit[2], entry=list(off_wit[3]))],
                constants={"offdiag_inf": float(off_min)},
            )
        )

    # row sums: bounded above / nonpositive
    rowsums = Cs.sum(axis=3)  # (nt, nx, m)
    row_max = rowsums.max(axis=(0, 1))
    idx = np.unravel_index(np.argmax(rowsums), rowsums.shape)
    worst_row = (ts[idx[0]], xs[idx[1]], rowsums[idx], idx[2])
    if spec is not None:
        sups, certified = [], True
        for i in range(model.m):
            s, cert = poly_rowsum_sup(spec, i)
            sups.append(s)
            certified = certified and cert
        if certified:
            bounded = all(math.isfinite(s) for s in sups)
            rep.add(
                HypothesisCheck(
                    "rowsum_upper",
                    "certified" if bounded else "refuted",
                    witnesses=[] if bounded else [_witness(*worst_row[:3], row=int(worst_row[3]))],
                    constants={"rowsum_sup": [float(s) for s in sups]},
                )
            )
            nonpos = bounded and all(s <= 0 for s in sups)
            rep.add(
                HypothesisCheck(
                    "rowsum_nonpos",
                    "certified" if nonpos else "refuted",
                    witnesses=[] if nonpos else [_witness(*worst_row[:3], row=int(worst_row[3]))],
                    constants={"rowsum_sup": [float(s) for s in sups]},
                )
            )
        else:
            _sampled_rowsum_checks(rep, row_max, worst_row)
    else:
        _sampled_rowsum_checks(rep, row_max, worst_row)
    return rep


def _sampled_rowsum_checks(rep, row_max, worst_row):
    rep.add(
        HypothesisCheck(
            "rowsum_upper",
            "sampled-pass",
            constants={"rowsum_sup": [float(v) for v in row_max]},
            detail="boundedness above cannot be refuted from samples",
        )
    )
    ok = bool(np.all(row_max <= VANISH_TOL))
    rep.add(
        HypothesisCheck(
            "rowsum_nonpos",
            "sampled-pass" if ok else "refuted",
            witnesses=[] if ok else [_witness(*worst_row[:3], row=int(worst_row[3]))],
            constants={"rowsum_sup": [float(v) for v in row_max]},
        )
    )


def coupling_vanishes(model: CoefficientModel, j: int, k: int, ts, xs) -> bool:
    """Decide whether c_jk is identically zero (exact for polynomial models)."""
    if model.poly is not None:
        return model.poly.dmat[j][k].is_zero
    mx = max(abs(float(model.coupling(t, x)[j, k])) for t in ts for x in xs)
    return mx <= VANISH_TOL


def check_irreducibility(model: CoefficientModel, sample_box, sample_times, n_samples=128, seed=0):
    """Chain sets H_k^i: H_k^0 collects components feeding k directly, and
    each further level adds components feeding the previous level.  The
    system is irreducible when the chains cover everything, for every k."""
    if model.m == 1:
        return True, {}
    ts = [float(t) for t in sample_times]
    xs = sample_points(sample_box, model.d, n_samples, seed)
    nonzero = np.zeros((model.m, model.m), dtype=bool)
    for a in range(model.m):
        for b in range(model.m):
            if a != b:
                nonzero[a, b] = not coupling_vanishes(model, a, b, ts, xs)
    chains: dict[int, list[set]] = {}
    ok = True
    for k in range(model.m):
        levels = []
        covered = {k}
        current = {j for j in range(model.m) if j != k and nonzero[j, k]}
        while current:
            levels.append(set(current))
            covered |= current
            nxt = {
                j
                for j in range(model.m)
                if j not in covered and any(nonzero[j, l] for l in current)
            }
            current = nxt
        chains[k] = levels
        ok = ok and covered == set(range(model.m))
    return ok, chains


def check_lyapunov(
    model: CoefficientModel,
    phi: ScalarC2,
    J: tuple[float, float],
    mode: str,
    sample_box: float,
    n_samples: int = 400,
    seed: int = 0,
    c_grid=None,
) -> HypothesisReport:
    """Lyapunov inequalities for phi*1.

    mode="general": smallest lambda_J with A(t)(phi 1) <= lambda_J phi on the
    samples.  mode="dissipative": a pair (a, c), c > 0, with
    A(t)(phi 1) <= a - c phi; refuted when every candidate c forces the
    constraint to be active on the outer sample shell (the required a keeps
    growing with the box, so no global pair exists).
    """
    if mode not in ("general", "dissipative"):
        raise ValueError(f"unknown mode {mode!r}")
    t0, t1 = J
    ts = np.linspace(t0, t1, 9) if t1 > t0 else np.array([t0])
    xs = sample_points(sample_box, model.d, n_samples, seed)
    phis = np.array([phi.value(x) for x in xs])
    if np.any(phis <= 0):
        raise ValueError("phi nonpositive at a sample")
    radii = np.linalg.norm(xs, axis=1)
    psi_vec = phi.times_ones(model.m)
    A = np.empty((len(ts), len(xs), model.m))
    for it, t in enumerate(ts):
        for ix, x in enumerate(xs):
            A[it, ix] = eval_operator(model, psi_vec, t, x)

    rep = HypothesisReport(model.name)

    # blow-up proxy: phi must grow along the structured axis points
    order = np.argsort(radii)
    grow_ok = bool(np.all(np.diff(phis[order][:: max(1, len(xs) // 16)]) > -1e-12))
    rep.add(
        HypothesisCheck(
            "phi_blowup_proxy",
            "sampled-pass" if grow_ok else "sampled-fail",
            detail="monotone growth along rays checked up to the sample box only",
        )
    )

    if mode == "general":
        ratios = A / phis[None, :, None]
        lam = float(np.max(ratios))
        it, ix, k = np.unravel_index(np.argmax(ratios), ratios.shape)
        rep.add(
            HypothesisCheck(
                "lyapunov_general",
                "sampled-pass",
                constants={"lambdaJ": lam},
                witnesses=[_witness(ts[it], xs[ix], lam, k=int(k))],
            )
        )
    else:
        if c_grid is None:
            c_grid = np.geomspace(1e-3, 1e3, 50)
        outer = radii >= 0.8 * float(np.max(radii))
        inner = ~outer
        best = None
        scale = float(np.max(np.abs(A))) + 1.0
        for c in c_grid:
            g = A + c * phis[None, :, None]  # need max g =: a
            a_req = float(np.max(g))
            max_outer = float(np.max(g[:, outer, :])) if outer.any() else -math.inf
            max_inner = float(np.max(g[:, inner, :])) if inner.any() else -math.inf
            boundary_attained = max_outer > max_inner + 1e-9 * scale
            if boundary_attained:
                continue
            a_eff = max(a_req, 1e-12)
            if best is None or a_eff / c < best[0] / best[1]:
                best = (a_eff, float(c))
        if best is None:
            it, ix, k = np.unravel_index(np.argmax(A), A.shape)
            rep.add(
                HypothesisCheck(
                    "lyapunov_dissipative",
                    "refuted",
                    witnesses=[_witness(ts[it], xs[ix], float(A[it, ix, k]), k=int(k))],
                    detail="constraint active on the outer sample shell for every c",
                )
            )
        else:
            a, c = best
            rep.add(
                HypothesisCheck(
                    "lyapunov_dissipative",
                    "sampled-pass",
                    constants={"a": a, "c": c},
                )
            )

    # scalar per-component bound A_k(t) phi <= delta_J phi
    deltas = []
    for k in range(model.m):
        vals = np.array([[eval_scalar_part(model, k, phi, t, x) for x in xs] for t in ts])
        deltas.append(float(np.max(vals / phis[None, :])))
    rep.add(
        HypothesisCheck(
            "scalar_lyapunov",
            "sampled-pass",
            constants={"delta_J": deltas},
        )
    )
    return rep


def check_compactness_certificates(
    model: CoefficientModel,
    phi: ScalarC2,
    h_funcs,
    w_funcs,
    R: float,
    interval: tuple[float, float],
    mu: float,
    sample_box: float | None = None,
    n_samples: int = 400,
    h_growth=None,
    seed: int = 0,
) -> HypothesisReport:
    """Compactness certificates: A(t)(phi 1) <= -h_i(phi) outside B_R, the
    auxiliary inequality (A_k + c_kk) w_k >= mu w_k outside B_R, and
    integrability of 1/h_i near infinity."""
    t0, t1 = interval
    box = sample_box if sample_box is not None else 2.0 * R
    if box <= R:
        raise ValueError("sample box must exceed the excluded ball radius R")
    ts = np.linspace(t0, t1, 9) if t1 > t0 else np.array([t0])
    xs_all = sample_points(box, model.d, n_samples, seed)
    xs = xs_all[np.linalg.norm(xs_all, axis=1) > R]
    if len(xs) == 0:
        raise ValueError("no samples outside B_R")
    rep = HypothesisReport(model.name)

    phis = np.array([phi.value(x) for x in xs])
    # convexity of each h on the sampled phi-range (midpoint test)
    ys = np.linspace(0.0, float(np.max(phis)), 64)
    for i, h in enumerate(h_funcs):
        hv = np.array([h(y) for y in ys])
        mid = np.array([h(0.5 * (y1 + y2)) for y1, y2 in zip(ys[:-2], ys[2:])])
        if np.any(mid > 0.5 * (hv[:-2] + hv[2:]) + 1e-9 * (1 + np.max(np.abs(hv)))):
            raise ValueError(f"nonconvex h sample triple detected for h_{i}")

    psi_vec = phi.times_ones(model.m)
    worst = None
    ok_i = True
    for t in ts:
        for x, p in zip(xs, phis):
            Av = eval_operator(model, psi_vec, t, x)
            for i in range(model.m):
                slack = -h_funcs[i](p) - Av[i]
                if worst is None or slack < worst[0]:
                    worst = (slack, t, x, i)
                if slack < 0:
                    ok_i = False
    rep.add(
        HypothesisCheck(
            "drift_dominates_h",
            "sampled-pass" if ok_i else "sampled-fail",
            witnesses=[] if ok_i else [_witness(worst[1], worst[2], worst[0], k=worst[3])],
            constants={"min_slack": float(worst[0])},
        )
    )

    ok_ii = True
    worst2 = None
    for t in ts:
        for x in xs:
            C = np.asarray(model.coupling(t, x), dtype=float)
            for k, w in enumerate(w_funcs):
                wv = w.value(x)
                if wv <= 0:
                    ok_ii = False
                    worst2 = (wv, t, x, k)
                    continue
                val = eval_scalar_part(model, k, w, t, x) + C[k, k] * wv - mu * wv
                if worst2 is None or val < worst2[0]:
                    worst2 = (val, t, x, k)
                if val < 0:
                    ok_ii = False
    rep.add(
        HypothesisCheck(
            "aux_supersolution",
            "sampled-pass" if ok_ii else "sampled-fail",
            witnesses=[] if ok_ii else [_witness(worst2[1], worst2[2], worst2[0], k=worst2[3])],
            constants={"min_value": float(worst2[0]), "mu": float(mu)},
        )
    )

    # 1/h integrability at +infinity: numeric quadrature up to the sampled
    # range, tail decided by the declared growth exponent
    growth = h_growth if h_growth is not None else [1.0] * len(h_funcs)
    intg_ok = True
    tails = []
    for i, h in enumerate(h_funcs):
        ymax = max(float(np.max(phis)), 10.0)
        ygrid = np.linspace(0.0, ymax, 2048)
        hv = np.array([h(y) for y in ygrid])
        pos = hv > 0
        if not pos.any():
            intg_ok = False
            tails.append(math.inf)
            continue
        M = ygrid[pos][0] + 1e-9
        yy = np.linspace(M, ymax, 2048)
        vals = np.array([1.0 / h(y) for y in yy])
        head = float(np.trapezoid(vals, yy))
        finite_tail = growth[i] > 1.0
        tails.append(head)
        intg_ok = intg_ok and finite_tail
    rep.add(
        HypothesisCheck(
            "h_tail_integrable",
            "sampled-pass" if intg_ok else "sampled-fail",
            witnesses=[] if intg_ok else [_witness(t0, xs[0], growth[0])],
            constants={"head_integrals": [float(v) for v in tails], "growth": list(map(float, growth))},
        )
    )
    return rep


def check_exponent_conditions(spec: PolynomialModelSpec) -> HypothesisReport:
    """All exponent inequalities of the polynomial family, decided exactly.

    Covers admissibility (signs, sigma ordering, ellipticity margin, the
    Lyapunov exponent balance), the compactness conditions, C0-preservation,
    Lp-invariance, the gradient-bound condition, and the certificate
    condition behind nontrivial invariant-measure limits.
    """
    d, m = spec.d, spec.m
    t0, t1 = spec.interval
    h, ell, sig = spec.h_exp, spec.ell_exp, spec.sigma_exp
    rep = HypothesisReport("polynomial")

    def add(name, ok, witness=None, consts=None, detail=""):
        rep.add(
            HypothesisCheck(
                name,
                "certified" if ok else "refuted",
                witnesses=[] if ok else [witness or {"detail": detail}],
                constants=consts or {},
                detail=detail,
            )
        )

    # (ii): sign pattern of dmat and strict sigma ordering
    ok_sign, wit = True, None
    for i in range(m):
        for j in range(m):
            lo, hi = spec.dmat[i][j].bounds(t0, t1)
            if i == j and hi >= 0:
                ok_sign, wit = False, {"entry": [i, j], "bound": hi}
            if i != j and lo <= 0:
                ok_sign, wit = False, {"entry": [i, j], "bound": lo}
    add("coupling_sign_pattern", ok_sign, wit)
    ok_sig, wit = True, None
    for i in range(m):
        for j in range(m):
            if i != j and not (sig[i, j] < sig[i, i]):
                ok_sig, wit = False, {"entry": [i, j], "sigma_ij": float(sig[i, j]), "sigma_ii": float(sig[i, i])}
    add("sigma_offdiag_below_diag", ok_sig, wit)

    # (iii): diagonal h dominance and positive ellipticity margin nu_k
    ok_h = all(
        min(h[k, i, i] for i in range(d)) >= max((h[k, i, j] for i in range(d) for j in range(d) if i != j), default=0.0)
        for k in range(m)
    )
    add("diffusion_exponent_dominance", ok_h, {"detail": "min h_ii < max offdiag h_ij"})
    nus = []
    ok_nu = True
    for k in range(m):
        nu, cert = poly_min_eig_lower(spec, k)
        nus.append(nu if cert or not math.isnan(nu) else math.nan)
        ok_nu = ok_nu and cert and nu > 0
    add("ellipticity_margin_positive", ok_nu, {"nu": [None if math.isnan(v) else float(v) for v in nus]}, consts={"nu": [None if math.isnan(v) else float(v) for v in nus]})

    # (iv): 1 + max{sigma_kk, l_i^k} > max h_ii^k
    ok4, wit = True, None
    for k in range(m):
        lhs = 1.0 + max(float(sig[k, k]), float(np.max(ell[k])))
        rhs = max(float(h[k, i, i]) for i in range(d))
        if not lhs > rhs:
            ok4, wit = False, {"k": k, "lhs": lhs, "rhs": rhs}
    add("lyapunov_exponent_balance", ok4, wit)

    # row sums of dmat nonpositive (needed by the common-Lyapunov hypotheses)
    ok_rs, wit, sups = True, None, []
    for k in range(m):
        s, cert = poly_rowsum_sup(spec, k)
        sups.append(s)
        if not (cert and s <= 0):
            ok_rs, wit = False, {"row": k, "sup": None if math.isnan(s) else float(s)}
    add("rowsum_nonpos", ok_rs, wit, consts={"rowsum_sup": [None if math.isnan(s) else float(s) for s in sups]})

    # compactness scale: max h_ii < 1 + max l
    ok_c, wit = True, None
    for k in range(m):
        lhs = max(float(h[k, i, i]) for i in range(d))
        rhs = 1.0 + float(np.max(ell[k]))
        if not lhs < rhs:
            ok_c, wit = False, {"k": k, "max_hii": lhs, "bound": rhs}
    add("compact_lyapunov_scale", ok_c, wit)

    taus = [spec.tau(k) for k in range(m)]
    add("tau_positive", all(t > 0 for t in taus), {"tau": taus}, consts={"tau": taus})

    # compactness auxiliary condition: max l > 1 + max{sigma_kk, h_ij - 2}
    ok_v, wit = True, None
    for k in range(m):
        lhs = float(np.max(ell[k]))
        rhs = 1.0 + max(float(sig[k, k]), float(np.max(h[k])) - 2.0)
        if not lhs > rhs:
            ok_v, wit = False, {"k": k, "max_l": lhs, "bound": rhs}
    add("compact_w_condition", ok_v, wit)

    # C0 preservation: max{h_ii - 1, sigma_kk} > max{max_j h_ij - 1, l_i, sigma_kj (j != k)}
    ok_m, wit = True, None
    for k in range(m):
        lhs = max(max(float(h[k, i, i]) for i in range(d)) - 1.0, float(sig[k, k]))
        rhs = max(
            float(np.max(h[k])) - 1.0,
            float(np.max(ell[k])),
            max((float(sig[k, j]) for j in range(m) if j != k), default=-math.inf),
        )
        if not lhs > rhs:
            ok_m, wit = False, {"k": k, "lhs": lhs, "rhs": rhs}
    add("c0_preserved_condition", ok_m, wit)

    # Lp invariance: sigma_ii > max{l_s^k, h_sj^k - 1} for every i
    lp_rhs = max(float(np.max(ell)), float(np.max(h)) - 1.0)
    ok_lp, wit = True, None
    for i in range(m):
        if not float(sig[i, i]) > lp_rhs:
            ok_lp, wit = False, {"i": i, "sigma_ii": float(sig[i, i]), "rhs": lp_rhs}
    add("lp_invariance_condition", ok_lp, wit)

    # gradient bound: max{min l, sigma_kk} > max{2 max_{i != k} sigma_ki, 2 sigma_kk - 1, min h_ii}
    ok_g, wit = True, None
    for k in range(m):
        lhs = max(float(np.min(ell[k])), float(sig[k, k]))
        rhs = max(
            2.0 * max((float(sig[k, i]) for i in range(m) if i != k), default=0.0),
            2.0 * float(sig[k, k]) - 1.0,
            min(float(h[k, i, i]) for i in range(d)),
        )
        if not lhs > rhs:
            ok_g, wit = False, {"k": k, "lhs": lhs, "rhs": rhs}
    add("gradient_bound_condition", ok_g, wit)

    # nontrivial Cesaro limits: exists j with max l^j > max{sigma_jj, h^j - 1}
    ok_52 = any(
        float(np.max(ell[j])) > max(float(sig[j, j]), float(np.max(h[j])) - 1.0)
        for j in range(m)
    )
    add("measure_certificate_condition", ok_52, {"detail": "no component satisfies the drift-domination condition"})
    return rep
