"""Physical parameters, unit conversion and the Lindblad D-coefficients.

Internally everything lives in natural units (hbar = c = k_B = 1) expressed
in powers of fm: energies and masses in fm^-1, lengths and times in fm,
rates such as gamma in c/fm = fm^-1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

HBARC_MEV_FM = 197.3269804

_UNITS = ("MeV", "fm", "c/fm", "fm/c")


def _check_unit(unit: str) -> None:
    if unit not in _UNITS:
        raise ValueError(f"unknown unit {unit!r}; expected one of {_UNITS}")


def to_internal(value: float, unit: str) -> float:
    """Convert ``value`` given in ``unit`` to the internal fm-power system."""
    _check_unit(unit)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} for unit {unit}")
    if unit == "MeV":
        return value / HBARC_MEV_FM
    return float(value)


def from_internal(value: float, unit: str) -> float:
    _check_unit(unit)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r} for unit {unit}")
    if unit == "MeV":
        return value * HBARC_MEV_FM
    return float(value)


class DxxMode(str, enum.Enum):
    ZERO = "zero"
    THERMAL = "thermal"


class Check(str, enum.Enum):
    """Outcome of a constraint check."""

    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"

    def __bool__(self) -> bool:
        return self is Check.PASS


@dataclass(frozen=True)
class PhysicalParams:
    """Bath and particle parameters in the units quoted in the literature.

    ``omega_cutoff_mev`` defaults to four times the temperature.
    """

    mass_mev: float
    temperature_mev: float
    gamma_cfm: float = 0.0
    omega_cutoff_mev: float | None = None
    osc_omega_cfm: float = 0.0
    dxx_mode: DxxMode = DxxMode.ZERO

    def __post_init__(self):
        if self.omega_cutoff_mev is None:
            object.__setattr__(self, "omega_cutoff_mev", 4.0 * self.temperature_mev)
        object.__setattr__(self, "dxx_mode", DxxMode(self.dxx_mode))
        errors = self.violations()
        if errors:
            raise ValueError("; ".join(errors))

    def violations(self) -> list[str]:
        out = []
        for name in ("mass_mev", "temperature_mev", "gamma_cfm",
                     "omega_cutoff_mev", "osc_omega_cfm"):
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} must be finite")
        if self.mass_mev <= 0:
            out.append("mass_mev must be > 0")
        if self.temperature_mev <= 0:
            out.append("temperature_mev must be > 0")
        if self.gamma_cfm < 0:
            out.append("gamma_cfm must be >= 0")
        if self.omega_cutoff_mev <= 0:
            out.append("omega_cutoff_mev must be > 0")
        if self.osc_omega_cfm < 0:
            out.append("osc_omega_cfm must be >= 0")
        return out

    @property
    def mass(self) -> float:
        return to_internal(self.mass_mev, "MeV")

    @property
    def temperature(self) -> float:
        return to_internal(self.temperature_mev, "MeV")

    @property
    def omega_cutoff(self) -> float:
        return to_internal(self.omega_cutoff_mev, "MeV")

    @property
    def gamma(self) -> float:
        return to_internal(self.gamma_cfm, "c/fm")

    @property
    def osc_omega(self) -> float:
        return to_internal(self.osc_omega_cfm, "c/fm")


@dataclass(frozen=True)
class DCoefficients:
    """Dissipator coefficients in internal units.

    d_pp in fm^-3, d_px in fm^-1, d_xx in fm. ``gamma`` and ``mass`` ride
    along because every consumer of the coefficients also needs them.
    """

    d_pp: float
    d_px: float
    d_xx: float
    gamma: float
    mass: float

    @classmethod
    def von_neumann(cls, mass: float) -> "DCoefficients":
        return cls(0.0, 0.0, 0.0, 0.0, mass)


def derive_coefficients(p: PhysicalParams) -> DCoefficients:
    m, T, g, cutoff = p.mass, p.temperature, p.gamma, p.omega_cutoff
    d_xx = g / (6.0 * m * T) if p.dxx_mode is DxxMode.THERMAL else 0.0
    return DCoefficients(
        d_pp=2.0 * g * m * T,
        d_px=-g * T / cutoff,
        d_xx=d_xx,
        gamma=g,
        mass=m,
    )


def check_dekker(d: DCoefficients, gamma: float | None = None) -> Check:
    """Positivity bound ``D_pp D_xx - D_px^2 >= gamma^2 / 4``.

    Only meaningful when ``d_xx != 0``; otherwise NOT_APPLICABLE.
    """
    if gamma is None:
        gamma = d.gamma
    if d.d_xx == 0.0:
        return Check.NOT_APPLICABLE
    lhs = d.d_pp * d.d_xx - d.d_px**2
    # relative slack so exact-boundary parameter sets are not lost to rounding
    rhs = gamma**2 / 4.0
    return Check.PASS if lhs >= rhs * (1.0 - 1e-12) else Check.FAIL


def harmonic_condition_lhs(d: DCoefficients, m: float, omega: float, gamma: float) -> float:
    if omega <= 0:
        raise ValueError("harmonic condition needs omega > 0")
    return (d.d_pp**2 - 4.0 * gamma * m * d.d_pp * d.d_px) / (gamma**2 * m**2 * omega**2)


def check_harmonic_condition(d: DCoefficients, m: float, omega: float, gamma: float) -> bool:
    return harmonic_condition_lhs(d, m, omega, gamma) >= 1.0 - 1e-12
