"""Semi-discrete Kurganov-Tadmor right-hand side.

This module holds the readable array implementation of every stage
(limiting, reconstruction, numerical fluxes, assembly). It doubles as the
pure-numpy backend; the fused numba kernel in :mod:`lindblad_kt.kernels`
must agree with it to rounding.

Interface indexing: along x there are N+1 interfaces, ``m = 0..N``, where
interface ``m`` sits between array cells ``G-1+m`` and ``G+m`` (``m = 0``
is the left wall). The same holds along y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .grid import GHOST, Grid, State
from .params import DCoefficients


def minmod(a, b):
    """sign(a) * min(|a|, |b|) when a and b share a sign, else 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


@dataclass
class RhsWorkspace:
    """Limited slopes and interface states.

    ``limited_dx``/``limited_dy`` have the full ghosted shape; their outermost
    layer along the differentiated axis is left at zero (no neighbour).
    ``x_minus``/``x_plus`` have shape (2, N+1, N); ``y_minus``/``y_plus``
    have shape (2, N, N+1).
    """

    limited_dx: np.ndarray
    limited_dy: np.ndarray
    x_minus: np.ndarray | None = None
    x_plus: np.ndarray | None = None
    y_minus: np.ndarray | None = None
    y_plus: np.ndarray | None = None


def limited_derivatives(u: np.ndarray, dx: float, limiter=minmod) -> RhsWorkspace:
    inv = 1.0 / dx
    ddx = np.zeros_like(u)
    ddy = np.zeros_like(u)
    ddx[:, 1:-1, :] = limiter((u[:, 2:, :] - u[:, 1:-1, :]) * inv,
                              (u[:, 1:-1, :] - u[:, :-2, :]) * inv)
    ddy[:, :, 1:-1] = limiter((u[:, :, 2:] - u[:, :, 1:-1]) * inv,
                              (u[:, :, 1:-1] - u[:, :, :-2]) * inv)
    return RhsWorkspace(ddx, ddy)


def reconstruct(u: np.ndarray, ws: RhsWorkspace, dx: float, g: int = GHOST) -> RhsWorkspace:
    n = u.shape[1] - 2 * g
    phys = slice(g, g + n)
    left = slice(g - 1, g + n)      # cell on the low side of each interface
    right = slice(g, g + n + 1)     # cell on the high side
    h = 0.5 * dx
    ws.x_minus = u[:, left, phys] + h * ws.limited_dx[:, left, phys]
    ws.x_plus = u[:, right, phys] - h * ws.limited_dx[:, right, phys]
    ws.y_minus = u[:, phys, left] + h * ws.limited_dy[:, phys, left]
    ws.y_plus = u[:, phys, right] - h * ws.limited_dy[:, phys, right]
    return ws


def advection_numerical_flux(direction, x, y, u_plus, u_minus, c: DCoefficients) -> np.ndarray:
    """Central-upwind flux H = (f(u+) + f(u-))/2 - a/2 (u+ - u-)."""
    a = model.spectral_radius(x, y, c)
    f_p = model.advection_flux(direction, x, y, u_plus, c)
    f_m = model.advection_flux(direction, x, y, u_minus, c)
    return 0.5 * (f_p + f_m) - 0.5 * a * (u_plus - u_minus)


def diffusion_numerical_flux(direction, u_lo, u_hi, dtrans_lo, dtrans_hi, dx: float,
                             c: DCoefficients) -> np.ndarray:
    """Average of the physical diffusion flux over the two cells of an interface.

    The derivative along the flux direction is the two-point difference of
    the cell averages; the transverse derivative is each cell's limited one.
    """
    delta = (u_hi - u_lo) * (1.0 / dx)
    if model.Direction(direction) is model.Direction.X:
        q_lo = model.diffusion_flux("x", delta, dtrans_lo, c)
        q_hi = model.diffusion_flux("x", delta, dtrans_hi, c)
    else:
        q_lo = model.diffusion_flux("y", dtrans_lo, delta, c)
        q_hi = model.diffusion_flux("y", dtrans_hi, delta, c)
    return 0.5 * (q_lo + q_hi)


def interface_fluxes(u: np.ndarray, grid: Grid, c: DCoefficients, limiter=minmod):
    """Return (Hx, Hy, Px, Py) for a ghost-filled array ``u``."""
    g = grid.ghost_width
    n = grid.n_cells
    dx = grid.dx
    xc = grid.centers
    xf = grid.interfaces
    ws = reconstruct(u, limited_derivatives(u, dx, limiter), dx, g)
    phys = slice(g, g + n)
    left = slice(g - 1, g + n)
    right = slice(g, g + n + 1)

    # x-interfaces: coordinates (xf[m], xc[k])
    hx = advection_numerical_flux("x", xf[:, None], xc[None, :], ws.x_plus, ws.x_minus, c)
    px = diffusion_numerical_flux("x", u[:, left, phys], u[:, right, phys],
                                  ws.limited_dy[:, left, phys], ws.limited_dy[:, right, phys],
                                  dx, c)
    # y-interfaces: coordinates (xc[j], xf[m])
    hy = advection_numerical_flux("y", xc[:, None], xf[None, :], ws.y_plus, ws.y_minus, c)
    py = diffusion_numerical_flux("y", u[:, phys, left], u[:, phys, right],
                                  ws.limited_dx[:, phys, left], ws.limited_dx[:, phys, right],
                                  dx, c)
    return hx, hy, px, py


def rhs_numpy(u: np.ndarray, grid: Grid, c: DCoefficients, v_centers: np.ndarray,
              out: np.ndarray | None = None, limiter=minmod) -> np.ndarray:
    """Tendency of a ghost-filled array; ghost entries of the result are 0."""
    g = grid.ghost_width
    n = grid.n_cells
    dx = grid.dx
    hx, hy, px, py = interface_fluxes(u, grid, c, limiter)
    inv = 1.0 / dx
    adv_x = -(hx[:, 1:, :] - hx[:, :-1, :]) * inv
    adv_y = -(hy[:, :, 1:] - hy[:, :, :-1]) * inv
    dif_x = (px[:, 1:, :] - px[:, :-1, :]) * inv
    dif_y = (py[:, :, 1:] - py[:, :, :-1]) * inv

    xc = grid.centers
    x = xc[:, None]
    y = xc[None, :]
    phys_u = u[:, g:g + n, g:g + n]
    dv = v_centers[:, None] - v_centers[None, :]
    loss = 2.0 * c.gamma - c.d_pp * (x - y) ** 2
    src = np.stack([-dv * phys_u[1] + loss * phys_u[0], dv * phys_u[0] + loss * phys_u[1]])

    if out is None:
        out = np.zeros_like(u)
    else:
        out[...] = 0.0
    # grouping keeps the x<->y transpose symmetry exact in floating point
    out[:, g:g + n, g:g + n] = ((adv_x + adv_y) + (dif_x + dif_y)) + src
    return out


def rhs(s: State, pot: model.Potential, c: DCoefficients, backend: str | None = None) -> State:
    """Tendency of a state whose ghosts are already filled."""
    from .kernels import make_rhs

    fn = make_rhs(s.grid, pot, c, backend=backend)
    du = fn(s.time, s.u)
    return State(s.grid, du, s.time)
