"""Lindblad master equation in position space, solved with a Kurganov-Tadmor scheme."""

__version__ = "0.1.0"

from .grid import Boundary, Grid, State, build_grid
from .initial import InitialSpec
from .integrator import IntegrationAborted, IntegratorConfig
from .model import Potential
from .params import DCoefficients, DxxMode, PhysicalParams, derive_coefficients
from .solver import Problem, Recorder

__all__ = [
    "Boundary", "DCoefficients", "DxxMode", "Grid", "InitialSpec", "IntegrationAborted",
    "IntegratorConfig", "PhysicalParams", "Potential", "Problem", "Recorder", "State",
    "build_grid", "derive_coefficients",
]
