"""Builtin model constructors used by the shipped configs and the tests."""

from __future__ import annotations

import numpy as np

from evosys.coefficients import (
    CoefficientModel,
    ModelDerivatives,
    PolynomialModelSpec,
    build_polynomial_model,
)

# The two 4x4 coupling matrices scaled by (|x|+1).  The first satisfies the
# sign conditions (off-diagonal >= 0, row sums <= 0); the second breaks them
# with a positive last-row sum.
RAMP_MATRIX_GOOD = np.array(
    [
        [-4.0, 1.0, 2.0, 1.0],
        [1.0, -3.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 2.0, 0.0, -2.0],
    ]
)
RAMP_MATRIX_BAD = np.array(
    [
        [-4.0, 0.0, 2.0, 1.0],
        [0.0, -3.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [1.0, 2.0, 0.0, -2.0],
    ]
)


def polynomial_spec(
    d,
    m,
    omega,
    h_exp,
    gamma,
    ell_exp,
    dmat,
    sigma_exp,
    interval=(0.0, 1.0),
) -> PolynomialModelSpec:
    """Spec from plain nested lists; numbers become constant time functions."""
    from evosys.timefn import parse_timefn

    om = tuple(
        tuple(tuple(parse_timefn(omega[k][i][j]) for j in range(d)) for i in range(d))
        for k in range(m)
    )
    ga = tuple(tuple(parse_timefn(gamma[k][i]) for i in range(d)) for k in range(m))
    dm = tuple(tuple(parse_timefn(dmat[a][b]) for b in range(m)) for a in range(m))
    return PolynomialModelSpec(
        d=d,
        m=m,
        omega=om,
        h_exp=np.asarray(h_exp, dtype=float),
        gamma=ga,
        ell_exp=np.asarray(ell_exp, dtype=float),
        dmat=dm,
        sigma_exp=np.asarray(sigma_exp, dtype=float),
        interval=interval,
    )


def ou_model(q=1.0, gamma=1.0, d=1, m=1, coupling=None, interval=(0.0, 1.0)):
    """Ornstein-Uhlenbeck system: Q^k = q_k I, b^k = -gamma_k x.

    `q` and `gamma` may be scalars or per-component sequences; `coupling`
    is an optional constant (m, m) matrix (zero if omitted).
    """
    qs = np.broadcast_to(np.asarray(q, dtype=float), (m,))
    gs = np.broadcast_to(np.asarray(gamma, dtype=float), (m,))
    C = np.zeros((m, m)) if coupling is None else np.asarray(coupling, dtype=float)
    omega = [[[qs[k] if i == j else 0.0 for j in range(d)] for i in range(d)] for k in range(m)]
    gam = [[gs[k]] * d for k in range(m)]
    spec = polynomial_spec(
        d,
        m,
        omega,
        np.zeros((m, d, d)),
        gam,
        np.zeros((m, d)),
        C.tolist(),
        np.zeros((m, m)),
        interval=interval,
    )
    model = build_polynomial_model(spec)
    return CoefficientModel(
        d=model.d,
        m=model.m,
        diffusion=model.diffusion,
        drift=model.drift,
        coupling=model.coupling,
        autonomous=True,
        poly=spec,
        derivatives=model.derivatives,
        name="ou",
    )


def coupled_ou_model(q=0.5, gamma=1.0, coupling=((-1.0, 1.0), (1.0, -1.0)), d=1, interval=(0.0, 1.0)):
    """m=2 system with identical scalar parts and a constant coupling matrix.

    With zero row sums and positive off-diagonal entries this is the tensor
    oracle model: the solution factorizes through exp((t-s)C) applied to the
    scalar flow.
    """
    C = np.asarray(coupling, dtype=float)
    m = C.shape[0]
    return ou_model(q=q, gamma=gamma, d=d, m=m, coupling=C, interval=interval)


def ramp_coupling_model(variant=1, d=1, q=None, gamma=None, interval=(0.0, 1.0)):
    """m=4 OU-type scalar parts coupled through (|x|+1) times a fixed matrix.

    variant=1 uses the sign-compatible matrix, variant=2 the one whose last
    row sum is positive.  The coupling grows linearly, so this model sits
    outside the polynomial family and is checked by sampling.
    """
    C0 = RAMP_MATRIX_GOOD if variant == 1 else RAMP_MATRIX_BAD
    m = 4
    qs = np.asarray(q if q is not None else [0.5, 0.6, 0.7, 0.8], dtype=float)
    gs = np.asarray(gamma if gamma is not None else [1.0, 1.1, 1.2, 1.3], dtype=float)

    def diffusion(k, t, x):
        return qs[k] * np.eye(d)

    def drift(k, t, x):
        return -gs[k] * np.asarray(x, dtype=float)

    def coupling(t, x):
        return (np.linalg.norm(x) + 1.0) * C0

    def q_grad(k, t, x):
        return np.zeros((d, d, d))

    def b_jac(k, t, x):
        return -gs[k] * np.eye(d)

    def div_gamma(k, t, x):
        return -gs[k] * d

    def c_grad(t, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        direction = x / r if r > 0 else np.zeros(d)
        return C0[:, :, None] * direction[None, None, :]

    return CoefficientModel(
        d=d,
        m=m,
        diffusion=diffusion,
        drift=drift,
        coupling=coupling,
        autonomous=True,
        derivatives=ModelDerivatives(q_grad, b_jac, div_gamma, c_grad),
        name=f"ramp_coupling_v{variant}",
    )


def superdrift_pair_spec(interval=(0.0, 2.5)) -> PolynomialModelSpec:
    """m=2 family member with strongly superlinear inward drift.

    tau_k = 2 > 0 and the auxiliary exponent condition holds, so the
    evolution operator is compact and neither C0 nor Lp is preserved; the
    gradient-bound exponent condition holds as well.
    """
    return polynomial_spec(
        d=1,
        m=2,
        omega=[[[1.0]], [[1.3]]],
        h_exp=np.zeros((2, 1, 1)),
        gamma=[[1.0], [1.2]],
        ell_exp=[[2.0], [2.0]],
        dmat=[[-2.0, 1.0], [1.0, -2.0]],
        sigma_exp=[[0.5, 0.0], [0.0, 0.5]],
        interval=interval,
    )


def lineardrift_pair_spec(interval=(0.0, 2.5)) -> PolynomialModelSpec:
    """m=2 family member with linear drift and dominant diagonal decay:
    Gamma is finite (Lp invariance) and C0 is preserved."""
    return polynomial_spec(
        d=1,
        m=2,
        omega=[[[1.0]], [[1.3]]],
        h_exp=np.zeros((2, 1, 1)),
        gamma=[[1.0], [1.2]],
        ell_exp=[[0.0], [0.0]],
        dmat=[[-2.0, 1.0], [1.0, -2.0]],
        sigma_exp=[[0.5, 0.0], [0.0, 0.5]],
        interval=interval,
    )


def ou_measure_model(interval=(0.0, 25.0)):
    """Fast-relaxing scalar OU whose invariant law is N(0, 1/2)."""
    return ou_model(q=1.5, gamma=3.0, interval=interval)


def ou_kernel_model(interval=(0.0, 5.0)):
    """Scalar OU with transition law N(x e^{-t}, (1 - e^{-2t})/2)."""
    return ou_model(q=0.5, gamma=1.0, interval=interval)
