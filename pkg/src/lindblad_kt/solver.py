"""Glue between the grid, the scheme and the integrator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .grid import Boundary, Grid, State, fill_ghosts, init_from_density
from .integrator import IntegrationStats, IntegratorConfig, integrate
from .kernels import make_rhs
from .model import Potential
from .params import DCoefficients


@dataclass
class Problem:
    grid: Grid
    coeffs: DCoefficients
    potential: Potential
    boundary: Boundary = Boundary.MIRROR_NEGATE
    backend: str | None = None

    def __post_init__(self):
        self.boundary = Boundary(self.boundary)
        self._rhs = make_rhs(self.grid, self.potential, self.coeffs, backend=self.backend)

    @property
    def rhs_fn(self):
        return self._rhs

    def boundary_fn(self, u: np.ndarray) -> np.ndarray:
        return fill_ghosts(u, self.boundary, self.grid.ghost_width)

    def initial_state(self, rho0) -> State:
        return init_from_density(self.grid, rho0, self.boundary)

    def tendency(self, s: State) -> np.ndarray:
        u = s.u.copy()
        self.boundary_fn(u)
        return self._rhs(s.time, u)

    def evolve(self, s0: State, cfg: IntegratorConfig, observer=None,
               stats: IntegrationStats | None = None) -> State:
        """Integrate to ``cfg.t_final``; ``observer(State)`` sees each sample."""
        grid = self.grid

        def obs(t, u):
            if observer is not None:
                observer(State(grid, u, t))

        u = integrate(s0.u, cfg, self._rhs, self.boundary_fn, obs, t0=s0.time,
                      interior=grid.interior, stats=stats)
        return State(grid, u.copy(), cfg.t_final)


@dataclass
class Recorder:
    """Observer collecting norm deviation, imaginary violation and snapshots."""

    trace0: float
    keep_states: bool = False
    series: diag.DiagnosticsSeries = field(default_factory=diag.DiagnosticsSeries)
    states: list = field(default_factory=list)

    def __call__(self, s: State) -> None:
        self.series.append(s.time, diag.norm_deviation(s, self.trace0), diag.imag_violation(s))
        if self.keep_states:
            self.states.append(s.copy())
