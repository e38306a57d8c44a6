"""Config-driven experiment runner.

One config file per run; subcommands cover the pipeline: hypothesis checks,
solve, exhaustion, kernels, tightness, measures, verify.  Every run writes
a manifest with the config hash and an inventory of its outputs.  Exit
codes: 0 pass, 1 refuted hypothesis or failed property, 2 config error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import struct
import sys
import time
from pathlib import Path

import numpy as np

from evosys import __version__
from evosys.coefficients import (
    ScalarC2,
    VectorC2,
    check_irreducibility,
    check_compactness_certificates,
    check_lyapunov,
    check_exponent_conditions,
    check_structural_hypotheses,
    eval_operator,
    phi_quadratic,
)
from evosys.config import build_domain, build_model, config_hash, load_config, named_initial_data
from evosys.discretization import DiscreteDomain
from evosys.errors import CertificateError, ConfigError, SolveError
from evosys.kernels import estimate_kernels, tightness_profile
from evosys.measures import cesaro_measures, invariance_residual
from evosys.solver import EvolveConfig, compute_Kbar, evolve, exhaustion_solve, grid_field
from evosys.util import sample_points
from evosys.verify import (
    check_c0_behavior,
    check_gradient_bound,
    check_L2_estimate,
    check_lower_bound_c0,
    check_lyapunov_bound,
    check_max_principle,
    check_ode_envelope,
    check_sup_estimate,
    compute_gamma,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _Manifest:
    def __init__(self, cfg, outdir: Path):
        self.data = {
            "config_hash": config_hash(cfg),
            "version": __version__,
            "operations": [],
            "outputs": [],
        }
        self.outdir = outdir

    def op(self, name, seconds):
        self.data["operations"].append({"name": name, "wall_time_s": round(seconds, 6)})

    def output(self, path: Path):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.data["outputs"].append({"file": path.name, "sha256": digest})

    def write(self, name="run_manifest.json"):
        path = self.outdir / name
        path.write_text(json.dumps(self.data, indent=2))


def _model_summary(model):
    return {"name": model.name, "d": model.d, "m": model.m, "autonomous": model.autonomous}


def _w_standard(d: int) -> ScalarC2:
    """w(x) = 1 + 1/(1+|x|^2), the standard auxiliary supersolution."""

    def val(x):
        return 1.0 + 1.0 / (1.0 + float(np.dot(x, x)))

    def grad(x):
        u = 1.0 + float(np.dot(x, x))
        return -2.0 * np.asarray(x) / u**2

    def hess(x):
        u = 1.0 + float(np.dot(x, x))
        x = np.asarray(x, dtype=float)
        return 8.0 * np.outer(x, x) / u**3 - 2.0 * np.eye(d) / u**2

    return ScalarC2(val, grad, hess)


def _v_decay(d: int, m: int) -> VectorC2:
    """v(x) = (1+|x|^2)^{-1} times the ones vector."""

    def sval(x):
        return 1.0 / (1.0 + float(np.dot(x, x)))

    def sgrad(x):
        u = 1.0 + float(np.dot(x, x))
        return -2.0 * np.asarray(x) / u**2

    def shess(x):
        u = 1.0 + float(np.dot(x, x))
        x = np.asarray(x, dtype=float)
        return 8.0 * np.outer(x, x) / u**3 - 2.0 * np.eye(d) / u**2

    return ScalarC2(sval, sgrad, shess).times_ones(m)


def fit_h_polynomial(model, phi: ScalarC2, box: float, interval, n_samples=400, seed=0):
    """Fit h(y) = c1 y^{1+tau} - c2 with A(t)(phi 1) <= -h(phi) on the box."""
    spec = model.poly
    if spec is None:
        raise CertificateError("h-fit needs a polynomial model")
    tau = max(spec.tau(k) for k in range(model.m))
    if tau <= 0:
        raise CertificateError("tau must be positive for the convex comparison function")
    t0, t1 = interval
    ts = np.linspace(t0, t1, 5) if t1 > t0 else [t0]
    xs = sample_points(box, model.d, n_samples, seed)
    psi = phi.times_ones(model.m)
    A = np.array([[eval_operator(model, psi, t, x) for x in xs] for t in ts])
    phis = np.array([phi.value(x) for x in xs])
    p = 1.0 + tau
    # outer-shell asymptotic coefficient sets the scale of c1
    shell = np.linalg.norm(xs, axis=1) >= 0.7 * box
    coef = np.min(-A[:, shell, :] / (phis[None, shell, None] ** p))
    c1 = max(coef * 0.5, 1e-6)
    c2 = max(float(np.max(A + c1 * phis[None, :, None] ** p)), 1e-12)
    h = lambda y, c1=c1, c2=c2, p=p: c1 * y**p - c2
    return h, {"c1": float(c1), "c2": float(c2), "power": float(p), "tau": float(tau)}


def _compactness_certificate(model, dom, window, seed=0):
    phi = phi_quadratic(model.d)
    h, hconsts = fit_h_polynomial(model, phi, dom.L, window, seed=seed)
    w = _w_standard(model.d)
    rep = check_compactness_certificates(
        model,
        phi,
        [h] * model.m,
        [w] * model.m,
        R=dom.L / 2.0,
        interval=window,
        mu=1.0,
        sample_box=dom.L,
        h_growth=[hconsts["power"]] * model.m,
        seed=seed,
    )
    return rep, h, hconsts


# ---------------------------------------------------------------------------
# commands

def cmd_check(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    try:
        dom_box = float(cfg.get("grid", {}).get("L", 4.0))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad grid half-width: {err}") from err
    interval = tuple(cfg.get("model", {}).get("interval", (0.0, 1.0)))
    ts = list(np.linspace(interval[0], interval[1], 5))
    t0 = time.time()
    rep = check_structural_hypotheses(model, dom_box, ts, 400, seed=seed)
    man.op("check_structural_hypotheses", time.time() - t0)
    t0 = time.time()
    irr, chains = check_irreducibility(model, dom_box, ts, seed=seed)
    man.op("check_irreducibility", time.time() - t0)
    from evosys.coefficients import HypothesisCheck

    rep.add(
        HypothesisCheck(
            "irreducible",
            "certified" if model.poly is not None and irr else ("sampled-pass" if irr else "refuted"),
            witnesses=[] if irr else [{"chains": {str(k): [sorted(s) for s in v] for k, v in chains.items()}}],
            constants={"chains": {str(k): [sorted(s) for s in v] for k, v in chains.items()}},
        )
    )
    phi = phi_quadratic(model.d)
    for mode in ("general", "dissipative"):
        t0 = time.time()
        lrep = check_lyapunov(model, phi, interval, mode, dom_box, seed=seed)
        man.op(f"check_lyapunov[{mode}]", time.time() - t0)
        for c in lrep.checks:
            if not rep.has(c.name):
                rep.add(c)
    if model.poly is not None:
        t0 = time.time()
        srep = check_exponent_conditions(model.poly)
        man.op("check_exponent_conditions", time.time() - t0)
        for c in srep.checks:
            rep.add(c)
    out = outdir / "hypotheses.json"
    out.write_text(rep.to_json())
    man.output(out)
    man.write()
    required = cfg.get("model", {}).get("require", ["ellipticity", "offdiag_lower", "rowsum_upper", "irreducible"])
    failed = False
    for name in required:
        if not rep.has(name):
            print(f"required hypothesis {name!r} was not checked", file=sys.stderr)
            return EXIT_CONFIG
        if not rep.ok(name):
            wit = rep.get(name).witnesses
            print(f"refuted: {name} witness={wit[:1]}", file=sys.stderr)
            failed = True
    return EXIT_FAIL if failed else EXIT_OK


def _write_trajectory(path: Path, records, m, dom):
    xcols = [f"x{i+1}" for i in range(dom.d)]
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "k", *xcols, "value"])
        for rec in records:
            comps = rec.values.reshape(m, -1)
            for k in range(m):
                for p, x in enumerate(dom.points):
                    wr.writerow([repr(rec.t), k, *[repr(float(c)) for c in x], repr(float(comps[k, p]))])


def cmd_solve(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    dom = build_domain(cfg)
    ec = cfg.get("evolve")
    if not ec:
        raise ConfigError("missing [evolve] section")
    f = grid_field(dom, model.m, named_initial_data(ec.get("f", "bump"), model.m), t=float(ec["s"]))
    evc = EvolveConfig(
        s=float(ec["s"]),
        t_end=float(ec["t_end"]),
        dt=float(ec.get("dt", dom.dx)),
        scheme=ec.get("scheme", "implicit-euler"),
        record_times=tuple(ec.get("record", [float(ec["t_end"])])),
    )
    upwind = cfg.get("grid", {}).get("upwind")
    t0 = time.time()
    records = evolve(model, dom, evc, f, upwind=upwind)
    man.op("evolve", time.time() - t0)
    out = outdir / "trajectory.csv"
    _write_trajectory(out, records, model.m, dom)
    man.output(out)
    man.write()
    return EXIT_OK


def cmd_exhaustion(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    xc = cfg.get("exhaustion")
    if not xc:
        raise ConfigError("missing [exhaustion] section")
    f_eval = named_initial_data(xc.get("f", "bump"), model.m)
    t0 = time.time()
    rep = exhaustion_solve(
        model,
        f_eval,
        s=float(xc.get("s", 0.0)),
        t_end=float(xc.get("t_end", 0.5)),
        ladder=xc["ladder"],
        inner_L=float(xc["inner_L"]),
        tol=float(xc["tol"]),
        bc=cfg.get("grid", {}).get("bc", "dirichlet"),
        dt=xc.get("dt"),
        scheme=xc.get("scheme", "implicit-euler"),
        jobs=jobs,
    )
    man.op("exhaustion_solve", time.time() - t0)
    out = outdir / "exhaustion.json"
    out.write_text(
        json.dumps(
            {
                "ladder": rep.ladder,
                "deltas": rep.deltas,
                "converged": rep.converged,
                "inner_L": rep.inner_L,
                "bc": rep.bc,
            },
            indent=2,
        )
    )
    man.output(out)
    man.write()
    return EXIT_OK if rep.converged else EXIT_FAIL


def _require_nonnegative_coupling(model, box, seed):
    """Kernel nonnegativity rests on the coupling sign certificate."""
    rep = check_structural_hypotheses(model, box, [0.0, 0.5], 200, seed=seed)
    if not rep.ok("offdiag_nonneg"):
        raise CertificateError("offdiag_nonneg", witness=rep.get("offdiag_nonneg").witnesses[:1])
    return rep


def cmd_kernels(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    dom = build_domain(cfg)
    _require_nonnegative_coupling(model, dom.L, seed)
    kc = cfg.get("kernels")
    if not kc:
        raise ConfigError("missing [kernels] section")
    ec = cfg.get("evolve", {})
    s = float(ec.get("s", 0.0))
    dt = float(ec.get("dt", dom.dx))
    scheme = ec.get("scheme", "implicit-euler")
    for t in np.atleast_1d(kc["t"]):
        t0 = time.time()
        est = estimate_kernels(model, dom, s, float(t), dt=dt, scheme=scheme, upwind=cfg.get("grid", {}).get("upwind"))
        man.op(f"estimate_kernels[t={t}]", time.time() - t0)
        out = outdir / f"kernels_t{t}.bin"
        with out.open("wb") as fh:
            fh.write(struct.pack("<3i4d", dom.d, model.m, dom.N, dom.L, s, float(t), dt))
            fh.write(est.P.astype("<f8").tobytes(order="C"))
        man.output(out)
        meta = outdir / f"kernels_t{t}.json"
        meta.write_text(
            json.dumps({"clipped_mass": est.clipped_mass, "flagged": est.flagged, "shape": list(est.P.shape)})
        )
        man.output(meta)
    man.write()
    return EXIT_OK


def cmd_tightness(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    dom = build_domain(cfg)
    _require_nonnegative_coupling(model, dom.L, seed)
    kc = cfg.get("kernels")
    if not kc or "r" not in kc:
        raise ConfigError("tightness needs [kernels] with t and r lists")
    ec = cfg.get("evolve", {})
    t0 = time.time()
    table = tightness_profile(
        model,
        dom,
        float(ec.get("s", 0.0)),
        list(np.atleast_1d(kc["t"])),
        list(np.atleast_1d(kc["r"])),
        dt=float(ec.get("dt", dom.dx)),
        scheme=ec.get("scheme", "implicit-euler"),
        upwind=cfg.get("grid", {}).get("upwind"),
    )
    man.op("tightness_profile", time.time() - t0)
    out = outdir / "tightness.csv"
    with out.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "r", "i", "j", "tail"])
        for row in table.rows():
            wr.writerow([repr(row[0]), repr(row[1]), row[2], row[3], repr(row[4])])
    man.output(out)
    man.write()
    return EXIT_OK


def cmd_measures(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    dom = build_domain(cfg)
    _require_nonnegative_coupling(model, dom.L, seed)
    interval = tuple(cfg.get("model", {}).get("interval", (0.0, 1.0)))
    lrep = check_lyapunov(model, phi_quadratic(model.d), interval, "dissipative", dom.L, seed=seed)
    if not lrep.ok("lyapunov_dissipative"):
        raise CertificateError("lyapunov_dissipative", witness=lrep.get("lyapunov_dissipative").witnesses[:1])
    mc = cfg.get("measures")
    if not mc:
        raise ConfigError("missing [measures] section")
    dt = float(mc.get("dt", dom.dx))
    scheme = mc.get("scheme", "implicit-euler")
    t0 = time.time()
    ms = cesaro_measures(
        model,
        dom,
        x0=mc.get("x0", [0.0] * dom.d),
        j=int(mc.get("j", 0)),
        n=int(mc.get("n", 1)),
        r=float(mc["horizon"]),
        dt=dt,
        scheme=scheme,
        upwind=cfg.get("grid", {}).get("upwind"),
        tau_step=mc.get("tau_step"),
        tv_tol=float(mc.get("tv_tol", 5e-3)),
        s_times=mc.get("s_times", ()),
    )
    man.op("cesaro_measures", time.time() - t0)
    if ms.trivial:
        print(
            "cesaro limit is trivial (mass decayed); supply a certificate function g "
            "with (A_j + c_jj) g >= 0 to rule this model in",
            file=sys.stderr,
        )
    out = outdir / "measures.csv"
    xcols = [f"x{i+1}" for i in range(dom.d)]
    with out.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "i", *xcols, "mass"])
        for t in ms.times:
            mu = ms.mass(t)
            for i in range(ms.m):
                for p, x in enumerate(dom.points):
                    wr.writerow([repr(float(t)), i, *[repr(float(c)) for c in x], repr(float(mu[i, p]))])
    man.output(out)
    battery = ["ones", "bump", "sin"]
    residuals = {}
    if ms.anchor_index >= 1:
        for name in battery:
            f = named_initial_data(name, model.m)
            residuals[name] = invariance_residual(ms, model, dom, f, 0.0, float(ms.anchor_index), dt=dt, scheme=scheme)
    meta = outdir / "measures_manifest.json"
    meta.write_text(
        json.dumps(
            {
                "anchor_x0": [float(v) for v in ms.x0],
                "anchor_j": ms.j,
                "anchor_n": ms.anchor_index,
                "horizon": ms.horizon,
                "tv_ladder": {str(k): v for k, v in ms.tv_ladder.items()},
                "converged": ms.converged,
                "trivial": ms.trivial,
                "clipped": ms.clipped,
                "residuals": residuals,
                "total_mass": {str(t): ms.total_mass(t) for t in ms.times},
            },
            indent=2,
        )
    )
    man.output(meta)
    man.write()
    return EXIT_OK if (ms.converged and not ms.trivial) else EXIT_FAIL


_ALL_CHECKS = [
    "max_principle",
    "sup_estimate",
    "lyapunov_bound",
    "lower_bound_c0",
    "l2_estimate",
    "gradient_bound",
    "ode_envelope",
    "c0_preserve",
    "c0_not_preserved",
]


def _run_verify_check(name, model, dom, cfg, seed):
    vc = cfg.get("verify", {})
    window = tuple(vc.get("window", (0.0, 1.0)))
    s, T = float(window[0]), float(window[1])
    dt = float(vc.get("dt", dom.dx))
    scheme = vc.get("scheme", "implicit-euler")
    record = [float(t) for t in vc.get("record", [s + (T - s) / 2.0, T])]
    upwind = cfg.get("grid", {}).get("upwind")
    fname = vc.get("f", "bump")
    phi = phi_quadratic(model.d)

    if name == "max_principle":
        rep = check_structural_hypotheses(model, dom.L, [s, T], 300, seed=seed)
        f = grid_field(dom, model.m, named_initial_data("neg_bump", model.m), t=s)
        evc = EvolveConfig(s=s, t_end=T, dt=dt, scheme="implicit-euler", record_times=tuple(record))
        recs = evolve(model, dom, evc, f, upwind=True)
        return check_max_principle(f, recs, rep)
    if name == "sup_estimate":
        _, K = compute_Kbar(model, dom.L, [s, T])
        f = grid_field(dom, model.m, named_initial_data("sin", model.m), t=s)
        evc = EvolveConfig(s=s, t_end=T, dt=dt, scheme=scheme, record_times=tuple(record))
        recs = evolve(model, dom, evc, f, upwind=upwind)
        return check_sup_estimate(f, recs, K)
    if name == "lyapunov_bound":
        lrep = check_lyapunov(model, phi, (s, T), "dissipative", dom.L, seed=seed)
        chk = lrep.get("lyapunov_dissipative")
        if not chk.ok:
            raise CertificateError("dissipative Lyapunov fit refuted", witness=chk.witnesses[:1])
        a, c = chk.constants["a"], chk.constants["c"]
        return check_lyapunov_bound(model, dom, s, record, phi, a, c, dt=dt, scheme=scheme, upwind=upwind)
    if name == "lower_bound_c0":
        rep, _, _ = _compactness_certificate(model, dom, (s, T), seed=seed)
        return check_lower_bound_c0(model, dom, (s, T), rep.get("aux_supersolution"), dt=dt, scheme=scheme, upwind=upwind)
    if name == "l2_estimate":
        gam = compute_gamma(model, (s, T), dom.L, seed=seed)
        ddom = DiscreteDomain(dom.d, dom.L, dom.N, "dirichlet")
        f = grid_field(ddom, model.m, named_initial_data("bump", model.m), t=s)
        evc = EvolveConfig(s=s, t_end=T, dt=dt, scheme=scheme, record_times=tuple(record))
        recs = evolve(model, ddom, evc, f, upwind=upwind)
        return check_L2_estimate(f, recs, gam.Gamma)
    if name == "gradient_bound":
        fv = named_initial_data("sin", model.m)
        fg = lambda x: np.array([[math.cos(x[0] + 0.3 * k)] + [0.0] * (model.d - 1) for k in range(model.m)])
        return check_gradient_bound(
            model, dom, fv, fg, (s, T), record, dt=dt, scheme=scheme, upwind=upwind
        )
    if name == "ode_envelope":
        rep, h, hconsts = _compactness_certificate(model, dom, (s, T), seed=seed)
        v0 = check_lower_bound_c0(model, dom, (s, T), rep.get("aux_supersolution"), dt=dt, scheme=scheme, upwind=upwind)
        c0 = v0.constants["c0"]
        deltas = [d for d in (0.1, 0.5, 1.0) if s + d <= T + 1e-9] or [T - s]
        deltas = [round(d / dt) * dt for d in deltas]
        return check_ode_envelope(model, dom, s, deltas, phi, h, c0, dt=dt, scheme=scheme, upwind=upwind)
    if name == "c0_preserve":
        v = _v_decay(model.d, model.m)
        xs = sample_points(dom.L, model.d, 200, seed=seed)
        lam0 = 0.0
        for t in np.linspace(s, T, 5):
            for x in xs:
                ratios = eval_operator(model, v, float(t), x) / np.asarray(v.value(x))
                lam0 = max(lam0, float(np.max(ratios)))
        lam0 *= 1.05
        aux = {
            "v": v,
            "lam0": lam0 + 1e-6,
            "f_value": named_initial_data("bump", model.m),
            "support_radius": 3.0,
            "t_list": record,
            "s": s,
        }
        return check_c0_behavior(model, dom, "preserve", aux, dt=dt, scheme=scheme, upwind=upwind)
    if name == "c0_not_preserved":
        rep, _, _ = _compactness_certificate(model, dom, (s, T), seed=seed)
        v0 = check_lower_bound_c0(model, dom, (s, T), rep.get("aux_supersolution"), dt=dt, scheme=scheme, upwind=upwind)
        c0 = v0.constants["c0"]
        table = tightness_profile(model, dom, s, [T], [0.25 * dom.L, 0.5 * dom.L, 0.75 * dom.L], dt=dt, scheme=scheme, upwind=upwind)
        tails = table.max_table()[0]
        R = None
        for r, tail in zip(table.r_list, tails):
            if tail <= 0.4 * c0:
                R = r
                break
        if R is None:
            raise CertificateError("no radius with tail mass below c0/2 inside the box")
        aux = {"c0": c0, "R": R, "t": T, "s": s, "n": 64}
        return check_c0_behavior(model, dom, "not-preserve", aux, dt=dt, scheme=scheme, upwind=upwind)
    raise ConfigError(f"unknown verify check {name!r}")


def cmd_verify(cfg, outdir: Path, jobs=1, seed=0) -> int:
    man = _Manifest(cfg, outdir)
    model = build_model(cfg)
    dom = build_domain(cfg)
    vc = cfg.get("verify", {})
    names = vc.get("checks", "all")
    if names == "all" or names == ["all"]:
        names = list(_ALL_CHECKS)
    verdicts = []
    failed = False
    for name in names:
        t0 = time.time()
        try:
            v = _run_verify_check(name, model, dom, cfg, seed)
        except CertificateError as err:
            print(f"{name}: missing/refuted certificate: {err}", file=sys.stderr)
            failed = True
            verdicts.append({"property": name, "pass": False, "error": f"certificate: {err}"})
            man.op(name, time.time() - t0)
            continue
        man.op(name, time.time() - t0)
        verdicts.append(v.to_dict())
        failed = failed or not v.passed
        print(f"{name}: {'pass' if v.passed else 'FAIL'} measured={v.measured:.6g} bound={v.bound:.6g}")
    out = outdir / "verdicts.jsonl"
    out.write_text("\n".join(json.dumps(v) for v in verdicts) + "\n")
    man.output(out)
    man.write()
    return EXIT_FAIL if failed else EXIT_OK


_COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "exhaustion": cmd_exhaustion,
    "kernels": cmd_kernels,
    "tightness": cmd_tightness,
    "measures": cmd_measures,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="evosys", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run config (TOML or JSON)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--jobs", type=int, default=None, help="worker count (1 = serial)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, outdir, jobs=args.jobs or 1, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SolveError as err:
        print(f"numeric failure: {err} (t={err.t})", file=sys.stderr)
        return EXIT_NUMERIC
    except CertificateError as err:
        print(f"certificate failure: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
