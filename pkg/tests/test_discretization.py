import numpy as np
import pytest

from evosys.coefficients import CoefficientModel
from evosys.discretization import (
    apply_generator,
    assemble_generator,
    build_grid,
    default_upwind,
    min_offdiagonal,
)
from evosys.models import ou_model, ramp_coupling_model, superdrift_pair_spec
from evosys.coefficients import build_polynomial_model


def test_grid_1d_points():
    dom = build_grid(1, 1.0, 3, "dirichlet")
    assert dom.dx == pytest.approx(1.0)
    assert dom.coords == pytest.approx([-1.0, 0.0, 1.0])
    assert dom.points.shape == (3, 1)


def test_grid_2d_counts():
    dom = build_grid(2, 2.0, 5, "neumann")
    assert dom.npts == 25
    assert dom.dx == pytest.approx(1.0)
    assert dom.n_unknowns(3) == 75


def test_grid_zero_on_grid_odd_N():
    dom = build_grid(1, 3.7, 149, "dirichlet")
    assert 0.0 in dom.coords


def test_flat_index_round_trip():
    dom = build_grid(2, 1.0, 7, "dirichlet")
    m = 3
    seen = set()
    for k in range(m):
        for i in range(7):
            for j in range(7):
                flat = dom.flat_index(k, (i, j))
                assert dom.unflatten(flat) == (k, (i, j))
                seen.add(flat)
    assert seen == set(range(m * 49))


def test_grid_validation_errors():
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 2, "dirichlet")
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 11, "dirichlet")
    with pytest.raises(ValueError):
        build_grid(3, 1.0, 11, "dirichlet")
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 11, "periodic")


def test_heat_stencil_interior():
    heat = ou_model(q=1.0, gamma=1e-12)
    dom = build_grid(1, 2.0, 5, "dirichlet")
    gen = assemble_generator(heat, dom, 0.0, upwind=False)
    M = gen.matrix.toarray()
    dx2 = dom.dx**2
    row = M[2]
    assert row[1] == pytest.approx(1.0 / dx2, rel=1e-9)
    assert row[2] == pytest.approx(-2.0 / dx2, rel=1e-9)
    assert row[3] == pytest.approx(1.0 / dx2, rel=1e-9)
    # Dirichlet boundary rows are identically zero
    assert np.all(M[0] == 0) and np.all(M[-1] == 0)


def test_generator_matches_operator_on_quadratic():
    ou = ou_model(q=1.0, gamma=1.0)
    dom = build_grid(1, 4.0, 201, "dirichlet")
    gen = assemble_generator(ou, dom, 0.0, upwind=False)
    u = dom.points[:, 0] ** 2
    Lu = apply_generator(gen, u)
    inner = dom.inner_mask()
    exact = 2.0 - 2.0 * dom.points[:, 0] ** 2
    # quadratics are differenced exactly by the central stencils
    assert np.max(np.abs(Lu[inner] - exact[inner])) < 1e-9


def test_m_matrix_sign_pattern_ramp_coupling():
    model = ramp_coupling_model(variant=1)
    dom = build_grid(1, 4.0, 81, "dirichlet")
    gen = assemble_generator(model, dom, 0.0, upwind=True)
    assert min_offdiagonal(gen) >= -1e-14


def test_upwind_policy_defaults():
    assert default_upwind(build_polynomial_model(superdrift_pair_spec()))
    assert not default_upwind(ou_model())
    assert not default_upwind(ramp_coupling_model())


def test_block_row_sums_reproduce_coupling_row_sums():
    # discrete analogue of A 1 = C 1: diffusion and drift stencils kill
    # constants, leaving exactly the sampled coupling row sums inside
    model = ramp_coupling_model(variant=1)
    dom = build_grid(1, 3.0, 41, "dirichlet")
    for upwind in (True, False):
        gen = assemble_generator(model, dom, 0.0, upwind=upwind)
        out = apply_generator(gen, np.ones(gen.shape[0])).reshape(4, -1)
        interior = ~dom.boundary_mask()
        for p in np.where(interior)[0]:
            expected = model.coupling(0.0, dom.points[p]).sum(axis=1)
            assert out[:, p] == pytest.approx(expected, abs=1e-10)


def test_apply_generator_zero_and_constants():
    heat = ou_model(q=1.0, gamma=1e-12)
    dom = build_grid(1, 2.0, 21, "neumann")
    gen = assemble_generator(heat, dom, 0.0, upwind=False)
    assert np.all(apply_generator(gen, np.zeros(21)) == 0.0)
    out = apply_generator(gen, np.ones(21))
    # constants sit in the kernel of pure diffusion, mirror rows included
    assert np.max(np.abs(out)) < 1e-9


def test_apply_generator_agrees_with_dense():
    model = ou_model(q=0.7, gamma=1.2, m=2, coupling=[[-1.0, 1.0], [0.5, -0.5]])
    dom = build_grid(1, 2.0, 9, "neumann")
    gen = assemble_generator(model, dom, 0.0, upwind=False)
    dense = gen.matrix.toarray()
    rng = np.random.default_rng(0)
    u = rng.normal(size=18)
    assert np.max(np.abs(apply_generator(gen, u) - dense @ u)) < 1e-13


def test_apply_generator_linearity():
    model = ou_model(q=1.0, gamma=1.0)
    dom = build_grid(1, 3.0, 41, "dirichlet")
    gen = assemble_generator(model, dom, 0.0)
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=41), rng.normal(size=41)
    a, b = 1.7, -0.3
    lhs = apply_generator(gen, a * u + b * v)
    rhs = a * apply_generator(gen, u) + b * apply_generator(gen, v)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_shape_mismatch_error():
    model = ou_model()
    dom = build_grid(1, 2.0, 11, "dirichlet")
    gen = assemble_generator(model, dom, 0.0)
    with pytest.raises(ValueError):
        apply_generator(gen, np.zeros(12))


def test_nonsymmetric_diffusion_rejected():
    bad = CoefficientModel(
        d=2,
        m=1,
        diffusion=lambda k, t, x: np.array([[1.0, 0.3], [0.1, 1.0]]),
        drift=lambda k, t, x: np.zeros(2),
        coupling=lambda t, x: np.zeros((1, 1)),
        autonomous=True,
    )
    dom = build_grid(2, 1.0, 5, "dirichlet")
    with pytest.raises(ValueError, match="symmetric"):
        assemble_generator(bad, dom, 0.0)


def _smooth_model_2d():
    # smooth anisotropic coefficients with a cross term, for consistency order
    def diffusion(k, t, x):
        return np.array([[1.0 + 0.1 * np.sin(x[0]), 0.2], [0.2, 1.5 + 0.1 * np.cos(x[1])]])

    def drift(k, t, x):
        return np.array([-0.5 * x[0], 0.3 * np.sin(x[1])])

    return CoefficientModel(
        d=2, m=1, diffusion=diffusion, drift=drift,
        coupling=lambda t, x: np.array([[-0.4]]), autonomous=True,
    )


def test_consistency_second_order():
    """Refinement ladder: interior truncation error of the central scheme
    decays with slope >= 1.9 in log2 against a smooth function."""
    from evosys.coefficients import VectorC2, eval_operator

    model = _smooth_model_2d()
    psi = VectorC2(
        m=1,
        value=lambda x: np.array([np.sin(x[0]) * np.cos(0.7 * x[1])]),
        gradient=lambda x: np.array([[np.cos(x[0]) * np.cos(0.7 * x[1]), -0.7 * np.sin(x[0]) * np.sin(0.7 * x[1])]]),
        hessian=lambda x: np.array([[
            [-np.sin(x[0]) * np.cos(0.7 * x[1]), -0.7 * np.cos(x[0]) * np.sin(0.7 * x[1])],
            [-0.7 * np.cos(x[0]) * np.sin(0.7 * x[1]), -0.49 * np.sin(x[0]) * np.cos(0.7 * x[1])],
        ]]),
    )
    errs = []
    Ns = [21, 41, 81]
    for N in Ns:
        dom = build_grid(2, 1.0, N, "dirichlet")
        gen = assemble_generator(model, dom, 0.0, upwind=False)
        u = np.array([psi.value(x)[0] for x in dom.points])
        Lu = apply_generator(gen, u)
        exact = np.array([eval_operator(model, psi, 0.0, x)[0] for x in dom.points])
        inner = dom.window_mask(0.6)  # fixed window so the max is comparable across rungs
        errs.append(np.max(np.abs(Lu[inner] - exact[inner])))
    slopes = np.diff(-np.log2(errs))
    assert np.all(slopes >= 1.9), (errs, slopes)
