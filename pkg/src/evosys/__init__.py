"""Evolution operators of weakly coupled parabolic systems.

Builds the two-parameter solution operator of systems

    D_t u_k = Tr(Q^k(t,x) D^2 u_k) + <b^k(t,x), grad u_k> + (C(t,x) u)_k

on truncated grids, estimates the associated transition kernels, and turns
the quantitative theory (maximum principle, sup/L2/gradient estimates,
kernel tightness, invariant measure systems) into executable checks.
"""

from evosys.coefficients import (
    CoefficientModel,
    HypothesisReport,
    PolynomialModelSpec,
    ScalarC2,
    VectorC2,
    build_polynomial_model,
    eval_operator,
)
from evosys.discretization import DiscreteDomain, DiscreteGenerator, assemble_generator, build_grid
from evosys.solver import EvolveConfig, StateField, compute_Kbar, evolve, exhaustion_solve
from evosys.kernels import KernelEstimate, estimate_kernels, smooth_indicator, tail_mass
from evosys.measures import MeasureSystem, cesaro_measures, invariance_residual
from evosys.verify import PropertyVerdict

__all__ = [
    "CoefficientModel",
    "DiscreteDomain",
    "DiscreteGenerator",
    "EvolveConfig",
    "HypothesisReport",
    "KernelEstimate",
    "MeasureSystem",
    "PolynomialModelSpec",
    "PropertyVerdict",
    "ScalarC2",
    "StateField",
    "VectorC2",
    "assemble_generator",
    "build_grid",
    "build_polynomial_model",
    "cesaro_measures",
    "compute_Kbar",
    "estimate_kernels",
    "eval_operator",
    "evolve",
    "exhaustion_solve",
    "invariance_residual",
    "smooth_indicator",
    "tail_mass",
]

__version__ = "0.1.0"
