"""Physical fluxes, source and wave speed of the conservative-form Lindblad
equation

    d_t u + d_x f^x(x, y, u) + d_y f^y(x, y, u)
        = d_x Q^x(d_x u, d_y u) + d_y Q^y(d_x u, d_y u) + S(x, y, u)

with ``u = (rho_I, rho_R)``. All functions broadcast over the trailing axes
of ``u`` and the coordinate arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import DCoefficients


class Direction(str, enum.Enum):
    X = "x"
    Y = "y"


class PotentialKind(str, enum.Enum):
    BOX = "box"
    HARMONIC = "harmonic"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class Potential:
    """Background potential V(x) in fm^-1.

    The box is V = 0 inside; its walls live in the boundary policy.
    ``samples``/``axis`` are only used by the tabulated kind.
    """

    kind: PotentialKind = PotentialKind.BOX
    mass: float = 0.0
    omega: float = 0.0
    samples: tuple[float, ...] = ()
    axis: tuple[float, ...] = ()

    @classmethod
    def box(cls) -> "Potential":
        return cls(PotentialKind.BOX)

    @classmethod
    def harmonic(cls, mass: float, omega: float) -> "Potential":
        return cls(PotentialKind.HARMONIC, mass=mass, omega=omega)

    @classmethod
    def tabulated(cls, axis, samples) -> "Potential":
        axis = np.asarray(axis, dtype=float)
        samples = np.asarray(samples, dtype=float)
        if axis.shape != samples.shape or axis.ndim != 1:
            raise ValueError("tabulated potential needs 1-D axis and samples of equal length")
        if not np.all(np.isfinite(samples)):
            raise ValueError("tabulated potential samples must be finite")
        return cls(PotentialKind.TABULATED, samples=tuple(samples), axis=tuple(axis))

    def __call__(self, x):
        return potential_eval(self, x)


def potential_eval(pot: Potential, x):
    x = np.asarray(x, dtype=float)
    kind = PotentialKind(pot.kind)
    if kind is PotentialKind.BOX:
        return np.zeros_like(x)
    if kind is PotentialKind.HARMONIC:
        return 0.5 * pot.mass * pot.omega**2 * x**2
    axis = np.asarray(pot.axis)
    samples = np.asarray(pot.samples)
    half = 0.5 * (axis[1] - axis[0]) if axis.size > 1 else 0.0
    if np.any(x < axis[0] - half - 1e-12) or np.any(x > axis[-1] + half + 1e-12):
        raise ValueError("tabulated potential queried outside its grid")
    idx = np.clip(np.rint((x - axis[0]) / (2 * half)).astype(int), 0, axis.size - 1) \
        if half > 0 else np.zeros(x.shape, dtype=int)
    return samples[idx]


def advection_flux(direction, x, y, u, c: DCoefficients) -> np.ndarray:
    rho_i, rho_r = u[0], u[1]
    r = x - y
    drift = -2.0 * c.d_px * r
    damp = c.gamma * r
    if Direction(direction) is Direction.Y:
        damp = -damp
    return np.stack([drift * rho_r + damp * rho_i, -drift * rho_i + damp * rho_r])


def diffusion_flux(direction, dxu, dyu, c: DCoefficients) -> np.ndarray:
    """Physical diffusion flux from the supplied derivative vectors."""
    k = 0.5 / c.mass
    dxx = c.d_xx
    # transverse terms grouped so the x and y fluxes mirror each other exactly
    if Direction(direction) is Direction.X:
        return np.stack([
            k * dxu[1] + dxx * (dxu[0] + dyu[0]),
            -k * dxu[0] + dxx * (dxu[1] + dyu[1]),
        ])
    return np.stack([
        -k * dyu[1] + dxx * (dyu[0] + dxu[0]),
        k * dyu[0] + dxx * (dyu[1] + dxu[1]),
    ])


def source(x, y, u, pot: Potential, c: DCoefficients) -> np.ndarray:
    rho_i, rho_r = u[0], u[1]
    dv = potential_eval(pot, x) - potential_eval(pot, y)
    loss = 2.0 * c.gamma - c.d_pp * (x - y) ** 2
    return np.stack([-dv * rho_r + loss * rho_i, dv * rho_i + loss * rho_r])


def spectral_radius(x, y, c: DCoefficients):
    """Largest |eigenvalue| of d f / d u; identical for both directions."""
    return np.abs(x - y) * np.sqrt(4.0 * c.d_px**2 + c.gamma**2)


def advection_jacobian(direction, x, y, c: DCoefficients) -> np.ndarray:
    r = x - y
    g = c.gamma * r if Direction(direction) is Direction.X else -c.gamma * r
    p = 2.0 * c.d_px * r
    return np.array([[g, -p], [p, g]])
