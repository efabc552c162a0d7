"""Square cell-centred grid, two-component state with ghost layers, and
boundary policies.

Array layout: ``u[c, j, k]`` with ``c = 0`` the imaginary part and ``c = 1``
the real part of rho(x_j, y_k). Physical cells occupy ``[G, G + N)`` along
both spatial axes with ``G = 2`` ghost layers on each side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

GHOST = 2
MIN_CELLS = 8

IMAG, REAL = 0, 1


class Boundary(str, enum.Enum):
    MIRROR_NEGATE = "mirror_negate"
    ZERO_GHOST = "zero_ghost"


@dataclass(frozen=True)
class Grid:
    extent_l: float
    n_cells: int
    ghost_width: int = GHOST

    def __post_init__(self):
        if not (self.extent_l > 0):
            raise ValueError(f"extent_l must be > 0, got {self.extent_l}")
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ValueError(
                f"n_cells must be an integer >= {MIN_CELLS} for the 5-point stencil, "
                f"got {self.n_cells}"
            )
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def dx(self) -> float:
        return self.extent_l / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        """Cell centres of the physical cells, shape (N,)."""
        j = np.arange(1, self.n_cells + 1)
        return -0.5 * self.extent_l + (j - 0.5) * self.dx

    @property
    def centers_with_ghosts(self) -> np.ndarray:
        g = self.ghost_width
        j = np.arange(1 - g, self.n_cells + g + 1)
        return -0.5 * self.extent_l + (j - 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        """Interface coordinates x_{j+1/2}, j = 0..N, shape (N+1,)."""
        return -0.5 * self.extent_l + np.arange(self.n_cells + 1) * self.dx

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.n_cells + 2 * self.ghost_width
        return (2, n, n)

    @property
    def interior(self) -> tuple[slice, slice, slice]:
        g = self.ghost_width
        return (slice(None), slice(g, g + self.n_cells), slice(g, g + self.n_cells))


def build_grid(extent_l: float, n_cells: int) -> Grid:
    return Grid(float(extent_l), n_cells)


@dataclass
class State:
    grid: Grid
    u: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        if self.u.shape != self.grid.shape:
            raise ValueError(f"state array has shape {self.u.shape}, grid needs {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "State":
        return cls(grid, np.zeros(grid.shape), time)

    @property
    def physical(self) -> np.ndarray:
        """View of the physical cells, shape (2, N, N)."""
        return self.u[self.grid.interior]

    @property
    def rho_real(self) -> np.ndarray:
        return self.physical[REAL]

    @property
    def rho_imag(self) -> np.ndarray:
        return self.physical[IMAG]

    def copy(self) -> "State":
        return State(self.grid, self.u.copy(), self.time)


def fill_ghosts(u: np.ndarray, policy: Boundary | str, g: int = GHOST) -> np.ndarray:
    """Fill the ghost layers of a raw ``(2, N+2g, N+2g)`` array in place."""
    policy = Boundary(policy)
    n = u.shape[1] - 2 * g
    if policy is Boundary.ZERO_GHOST:
        u[:, :g, :] = 0.0
        u[:, n + g:, :] = 0.0
        u[:, :, :g] = 0.0
        u[:, :, n + g:] = 0.0
        return u
    for i in range(g):
        # ghost at distance i+1 outside the wall mirrors physical cell i
        u[:, g - 1 - i, :] = -u[:, g + i, :]
        u[:, n + g + i, :] = -u[:, n + g - 1 - i, :]
    for i in range(g):
        u[:, :, g - 1 - i] = -u[:, :, g + i]
        u[:, :, n + g + i] = -u[:, :, n + g - 1 - i]
    return u


def apply_boundary(s: State, policy: Boundary | str) -> State:
    """Return ``s`` with ghosts refreshed under ``policy`` (in place)."""
    fill_ghosts(s.u, policy, s.grid.ghost_width)
    return s


def init_from_density(grid: Grid, rho0, policy: Boundary | str | None = None) -> State:
    """Sample ``rho0(x, y) -> (re, im)`` at the cell centres.

    ``rho0`` is called once with broadcastable coordinate arrays of shape
    (N, 1) and (1, N).
    """
    xc = grid.centers
    re, im = rho0(xc[:, None], xc[None, :])
    n = grid.n_cells
    re = np.broadcast_to(np.asarray(re, dtype=float), (n, n))
    im = np.broadcast_to(np.asarray(im, dtype=float), (n, n))
    for comp, name in ((re, "real"), (im, "imaginary")):
        bad = np.argwhere(~np.isfinite(comp))
        if bad.size:
            j, k = bad[0]
            raise ValueError(
                f"initial density {name} part is not finite at cell ({j}, {k}), "
                f"x={xc[j]:.6g} fm, y={xc[k]:.6g} fm"
            )
    s = State.zeros(grid)
    s.physical[REAL] = re
    s.physical[IMAG] = im
    if policy is not None:
        apply_boundary(s, policy)
    return s
