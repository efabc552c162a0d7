"""Conservation diagnostics and analytic equilibrium references."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import State
from .params import DCoefficients, from_internal


@dataclass
class DiagnosticsSeries:
    times: list = field(default_factory=list)
    norm_dev: list = field(default_factory=list)
    imag_violation: list = field(default_factory=list)
    fitted_temperature: float | None = None

    def append(self, t: float, norm_dev: float, imag: float) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("diagnostic times must be strictly ascending")
        self.times.append(float(t))
        self.norm_dev.append(float(norm_dev))
        self.imag_violation.append(float(imag))


def diagonal(s: State) -> np.ndarray:
    return np.diagonal(s.rho_real).copy()


def anti_diagonal(s: State) -> tuple[np.ndarray, np.ndarray]:
    """Samples of rho_R(x, -x) from cells (j, N-1-j); returns (x, values)."""
    x = s.grid.centers
    return x, np.fliplr(s.rho_real).diagonal()[::1].copy()


def trace(s: State) -> float:
    return float(np.trace(s.rho_real) * s.grid.dx)


def norm_deviation(s: State, trace0: float) -> float:
    if trace0 == 0:
        raise ValueError("reference trace is zero")
    return trace(s) / trace0 - 1.0


def imag_violation(s: State) -> float:
    im = s.rho_imag
    return float(np.abs(im).sum() / im.size)


def sigma_t(diagonals) -> np.ndarray:
    """RMS deviation of each diagonal entry from its first snapshot.

    ``diagonals`` has shape (n_snapshots, N); the first row is t_0.
    """
    d = np.asarray(diagonals, dtype=float)
    if d.ndim != 2 or d.shape[0] < 2:
        raise ValueError("sigma_t needs at least two diagonal snapshots")
    return np.sqrt(np.mean((d - d[0]) ** 2, axis=0))


def free_equilibrium(x, y, m: float, T: float, L: float):
    """Thermal density of a free particle confined to a box of width L."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-0.5 * m * T * (x - y) ** 2) / L


def _effective_dpp(m: float, gamma: float, c: DCoefficients) -> float:
    denom = c.d_pp - 4.0 * gamma * m * c.d_px
    if not denom > 0:
        raise ValueError("D_pp - 4 gamma m D_px must be positive for an equilibrium to exist")
    return denom


def ho_equilibrium(x, y, m: float, omega: float, gamma: float, c: DCoefficients):
    """Stationary density of the damped oscillator (valid for D_xx = 0)."""
    denom = _effective_dpp(m, gamma, c)
    if not gamma > 0:
        raise ValueError("oscillator equilibrium needs gamma > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    amp = math.sqrt(gamma) * m * omega / math.sqrt(math.pi * denom)
    return amp * np.exp(-gamma * (m * omega * (x + y)) ** 2 / (4.0 * denom)
                        - c.d_pp * (x - y) ** 2 / (4.0 * gamma))


def shifted_frequency(omega: float, m: float, gamma: float, c: DCoefficients) -> float:
    if c.d_pp == 0.0:
        return float(omega)
    denom = _effective_dpp(m, gamma, c)
    return omega * math.sqrt(c.d_pp / denom)


def fit_temperature(x, rho, m: float, floor: float = 1e-3) -> float:
    """Temperature in MeV from an anti-diagonal profile A exp(-2 m T x^2).

    Log-linear least squares with weights proportional to rho, restricted to
    samples above ``floor * max(rho)``.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    peak = rho.max()
    keep = rho > floor * peak
    if keep.sum() < 5 or not peak > 0:
        raise ValueError(f"need >= 5 usable samples for the temperature fit, got {int(keep.sum())}")
    slope, _ = np.polyfit(x[keep] ** 2, np.log(rho[keep]), 1, w=rho[keep])
    return from_internal(-slope / (2.0 * m), "MeV")


def fit_gaussian_amplitude(x, rho, floor: float = 1e-3) -> float:
    """Peak amplitude A of the same log-linear fit."""
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    keep = rho > floor * rho.max()
    _, intercept = np.polyfit(x[keep] ** 2, np.log(rho[keep]), 1, w=rho[keep])
    return float(np.exp(intercept))


def deviation_map(s: State, oracle) -> np.ndarray:
    """|rho_num - rho_oracle| per cell; ``oracle(x, y)`` returns re or (re, im)."""
    xc = s.grid.centers
    ref = oracle(xc[:, None], xc[None, :])
    if isinstance(ref, tuple):
        ref_re, ref_im = ref
    else:
        ref_re, ref_im = ref, 0.0
    return np.hypot(s.rho_real - ref_re, s.rho_imag - ref_im)


def offdiagonal_decay_rate(values, times) -> float:
    """Exponential decay rate of |rho| at a fixed off-diagonal point.

    Raises ValueError when |rho| is not monotonically non-increasing.
    """
    v = np.abs(np.asarray(values, dtype=float))
    t = np.asarray(times, dtype=float)
    if v.size < 2 or v.size != t.size:
        raise ValueError("need at least two aligned samples")
    if np.any(np.diff(v) > 1e-12 * v.max()):
        raise ValueError("series is not monotonically decaying")
    if np.any(v <= 0):
        raise ValueError("series reaches zero; log fit undefined")
    slope, _ = np.polyfit(t, np.log(v), 1)
    return float(-slope)


def predicted_source_rate(x: float, y: float, c: DCoefficients) -> float:
    """Local decay rate D_pp (x-y)^2 - 2 gamma from the source term alone."""
    return c.d_pp * (x - y) ** 2 - 2.0 * c.gamma
