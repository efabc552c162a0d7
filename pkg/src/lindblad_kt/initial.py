"""Initial wave functions and the pure-state densities built from them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MAX_HERMITE_N = 60


def box_eigenstate(n: int, L: float, x):
    """Infinite-well eigenfunction on [-L/2, L/2]; n counts from 1."""
    if n < 1:
        raise ValueError("box eigenstates are numbered from n = 1")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 0.5 * L * (1 + 1e-12)):
        raise ValueError("x outside the box")
    k = n * math.pi / L
    amp = math.sqrt(2.0 / L)
    return amp * (np.sin(k * x) if n % 2 == 0 else np.cos(k * x))


def harmonic_eigenstate(n: int, mass: float, omega: float, x):
    """Normalised oscillator eigenfunction psi_n, n = 0 is the ground state.

    Uses the normalised three-term recurrence so no factorial or raw Hermite
    value is formed.
    """
    if n < 0:
        raise ValueError("harmonic quantum number must be >= 0")
    if n > MAX_HERMITE_N:
        raise ValueError(f"harmonic quantum number limited to {MAX_HERMITE_N}")
    x = np.asarray(x, dtype=float)
    mw = mass * omega
    xi = math.sqrt(mw) * x
    prev = np.zeros_like(xi)
    cur = (mw / math.pi) ** 0.25 * np.exp(-0.5 * xi * xi)
    for k in range(n):
        # psi_{k+1} = sqrt(2/(k+1)) xi psi_k - sqrt(k/(k+1)) psi_{k-1}
        nxt = math.sqrt(2.0 / (k + 1)) * xi * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
    return cur


def gaussian_packet(a: float, x):
    if not a > 0:
        raise ValueError("Gaussian width parameter a must be > 0")
    x = np.asarray(x, dtype=float)
    return (a / math.pi) ** 0.25 * np.exp(-0.5 * a * x * x)


def rectangular_packet(b: float, x, L: float | None = None):
    """Flat packet of half-width ``b``, normalised to unit norm."""
    if not b > 0 or (L is not None and not b < 0.5 * L):
        raise ValueError("rectangular packet needs 0 < b < L/2")
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < b, 1.0 / math.sqrt(2.0 * b), 0.0)


def pure_state_density(psi):
    """rho(x, y) = psi(x) psi(y) for a real ``psi``; returns (re, im)."""
    def rho0(x, y):
        re = psi(x) * psi(y)
        return re, np.zeros_like(re)
    return rho0


class InitialKind(str, enum.Enum):
    BOX_EIGENSTATE = "box_eigenstate"
    HARMONIC_EIGENSTATE = "harmonic_eigenstate"
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class InitialSpec:
    """Initial wave function choice.

    ``n`` is 1-based for the box and 0-based (0 = ground state) for the
    oscillator. ``a`` in fm^-2, ``b`` in fm.
    """

    kind: InitialKind
    n: int = 1
    a: float = 1.0
    b: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))
        errors = self.violations()
        if errors:
            raise ValueError("; ".join(errors))

    def violations(self, L: float | None = None) -> list[str]:
        out = []
        if self.kind is InitialKind.BOX_EIGENSTATE and self.n < 1:
            out.append("initial.n must be >= 1 for box eigenstates")
        if self.kind is InitialKind.HARMONIC_EIGENSTATE and not 0 <= self.n <= MAX_HERMITE_N:
            out.append(f"initial.n must be in [0, {MAX_HERMITE_N}] for oscillator eigenstates")
        if self.kind is InitialKind.GAUSSIAN and not self.a > 0:
            out.append("initial.a must be > 0")
        if self.kind is InitialKind.RECTANGULAR:
            if not self.b > 0:
                out.append("initial.b must be > 0")
            elif L is not None and not self.b < 0.5 * L:
                out.append("initial.b must be < L/2")
        return out

    def wave_function(self, L: float, mass: float | None = None, omega: float | None = None):
        if self.kind is InitialKind.BOX_EIGENSTATE:
            return lambda x: box_eigenstate(self.n, L, x)
        if self.kind is InitialKind.HARMONIC_EIGENSTATE:
            if not (mass and omega):
                raise ValueError("oscillator eigenstates need mass and omega > 0")
            return lambda x: harmonic_eigenstate(self.n, mass, omega, x)
        if self.kind is InitialKind.GAUSSIAN:
            return lambda x: gaussian_packet(self.a, x)
        return lambda x: rectangular_packet(self.b, x, L)

    def density(self, L: float, mass: float | None = None, omega: float | None = None):
        return pure_state_density(self.wave_function(L, mass, omega))
