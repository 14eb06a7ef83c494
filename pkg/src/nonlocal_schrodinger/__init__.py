"""Nonlocal-in-time Schroedinger solver.

Chebyshev-Gauss-Lobatto collocation in time, hyperbolic-contour
quadrature for operator functions of the Hamiltonian, and a fixed-point
iteration for a time-dependent potential.
"""

from .contour import DS_FLOOR, PI6, HyperbolicContour, SpectralEnvelope, build_contour
from .errors import (
    ConfigError, DivergenceError, NearZeroCharacteristic, RootFindError, SeparationError,
    SingularSolveError, SolverError, SpectralProximityError,
)
from .grid import ChebyshevGrid, build_grid, interpolate, lagrange, lebesgue_constant
from .nonlocal_cond import NonlocalCondition, PotentialDescriptor, check_separation, find_zeros
from .operators import DiagonalOperator, TridiagonalOperator, fd_build
from .propagator import propagate_hom, propagate_inhom, sample_resolvents
from .solver import IterationReport, NonlocalProblem, SolverConfig, TrajectorySolution, solve
from .special import QuadratureParams, lambert_w, quadrature_params

__version__ = "0.1.0"

__all__ = [
    "ChebyshevGrid", "ConfigError", "DS_FLOOR", "DiagonalOperator", "DivergenceError",
    "HyperbolicContour", "IterationReport", "NearZeroCharacteristic", "NonlocalCondition",
    "NonlocalProblem", "PI6", "PotentialDescriptor", "QuadratureParams", "RootFindError",
    "SeparationError", "SingularSolveError", "SolverConfig", "SolverError", "SpectralEnvelope",
    "SpectralProximityError", "TrajectorySolution", "TridiagonalOperator", "build_contour",
    "build_grid", "check_separation", "fd_build", "find_zeros", "interpolate", "lagrange",
    "lambert_w", "lebesgue_constant", "propagate_hom", "propagate_inhom", "quadrature_params",
    "sample_resolvents", "solve",
]
