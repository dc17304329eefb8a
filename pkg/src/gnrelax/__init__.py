"""Hyperbolic relaxation of the Green-Naghdi equations: solvers, diagnostics and experiments."""

__version__ = "0.1.0"

from .errors import (
    CavitationError,
    ConfigError,
    DomainError,
    GNRelaxError,
    InvalidFieldError,
    NonHyperbolicError,
    SolverError,
)
from .spectral import GridSpec, ScalarField, dealias, sobolev_norm, spectral_derivative
from .state import ParamSet, StateU, StateV, from_balanced, to_balanced

__all__ = [
    "CavitationError",
    "ConfigError",
    "DomainError",
    "GNRelaxError",
    "GridSpec",
    "InvalidFieldError",
    "NonHyperbolicError",
    "ParamSet",
    "ScalarField",
    "SolverError",
    "StateU",
    "StateV",
    "dealias",
    "from_balanced",
    "sobolev_norm",
    "spectral_derivative",
    "to_balanced",
]
