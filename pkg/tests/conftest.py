import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evosys.coefficients import VectorC2, phi_quadratic
from evosys.discretization import build_grid
from evosys.models import (
    coupled_ou_model,
    ou_model,
    ramp_coupling_model,
    superdrift_pair_spec,
    lineardrift_pair_spec,
)
from evosys.coefficients import build_polynomial_model

CONFIG_DIR = Path(__file__).parent.parent / "configs"


@pytest.fixture(scope="session")
def ou():
    return ou_model(q=1.0, gamma=1.0)


@pytest.fixture(scope="session")
def heat():
    # drift must stay positive for the polynomial family; effectively zero
    return ou_model(q=1.0, gamma=1e-9)


@pytest.fixture(scope="session")
def coupled_ou():
    return coupled_ou_model(q=0.5, gamma=1.0)


@pytest.fixture(scope="session")
def ramp4():
    return ramp_coupling_model(variant=1)


@pytest.fixture(scope="session")
def ramp4_bad():
    return ramp_coupling_model(variant=2)


@pytest.fixture(scope="session")
def superdrift_pair():
    return build_polynomial_model(superdrift_pair_spec())


@pytest.fixture(scope="session")
def lineardrift_pair():
    return build_polynomial_model(lineardrift_pair_spec())


@pytest.fixture
def dom_d():
    return build_grid(1, 4.0, 161, "dirichlet")


@pytest.fixture
def dom_n():
    return build_grid(1, 4.0, 161, "neumann")


def vector_quadratic(m: int) -> VectorC2:
    return phi_quadratic(1).times_ones(m)


def x_squared_vec(m: int = 1) -> VectorC2:
    return VectorC2(
        m=m,
        value=lambda x: np.full(m, x[0] ** 2),
        gradient=lambda x: np.tile([2.0 * x[0]], (m, 1)),
        hessian=lambda x: np.tile([[2.0]], (m, 1, 1)),
    )
