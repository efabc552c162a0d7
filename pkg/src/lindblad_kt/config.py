"""Run configuration: a flat ``section.key = value`` text format.

Physical inputs are in MeV, fm, c/fm and fm/c. Lines starting with ``#``
are comments, as is anything after an unquoted `` #``. Lists are comma
separated. Example::

    grid.extent_l = 40
    grid.n_cells = 200
    physics.mass = 470
    physics.temperature = 300
    physics.gamma = 0.5
    initial.kind = box_eigenstate
    initial.n = 1
    integrator.t_final = 30
    output.snapshot_times = 10, 20, 30
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import MIN_CELLS, Boundary, Grid
from .initial import InitialKind, InitialSpec
from .integrator import IntegratorConfig
from .model import Potential, PotentialKind
from .params import (Check, DCoefficients, DxxMode, PhysicalParams, check_dekker,
                     check_harmonic_condition, derive_coefficients, harmonic_condition_lhs,
                     to_internal)


class ConfigError(ValueError):
    """Raised with every problem found, one per line."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(v: str) -> int:
    x = float(v)
    if x != int(x):
        raise ValueError("must be an integer")
    return int(x)


def _floats(v: str) -> tuple:
    return tuple(_float(p) for p in v.split(",") if p.strip())


def _str(v: str) -> str:
    return v


def _opt_float(v: str):
    return None if v.lower() in ("", "none", "auto") else _float(v)


# key -> (parser, default); a default of ``...`` marks a required key
KEYS = {
    "grid.extent_l": (_float, 40.0),
    "grid.n_cells": (_int, ...),
    "physics.mass": (_float, 470.0),
    "physics.temperature": (_float, 300.0),
    "physics.gamma": (_float, 0.0),
    "physics.omega_cutoff": (_opt_float, None),
    "physics.dxx": (_str, "zero"),
    "potential.kind": (_str, "box"),
    "potential.omega": (_float, 0.0),
    "potential.file": (_str, ""),
    "initial.kind": (_str, ...),
    "initial.n": (_int, 1),
    "initial.a": (_float, 1.0),
    "initial.b": (_float, 5.0),
    "integrator.t_final": (_float, ...),
    "integrator.rel_tol": (_float, 1e-8),
    "integrator.abs_tol": (_float, 1e-8),
    "integrator.dt_initial": (_opt_float, None),
    "integrator.dt_min": (_float, 1e-12),
    "integrator.max_steps": (_int, 10_000_000),
    "boundary.policy": (_str, "auto"),
    "output.directory": (_str, "output"),
    "output.snapshot_times": (_floats, ()),
    "output.series_stride": (_float, 0.1),
    "run.backend": (_str, "auto"),
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value`` strings; syntax problems raise ConfigError."""
    raw: dict[str, str] = {}
    problems = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split(" #", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            problems.append(f"{source}:{lineno}: expected 'key = value', got {line!r}")
            continue
        if key in raw:
            problems.append(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    if problems:
        raise ConfigError(problems)
    return raw


def parse_override(item: str) -> tuple[str, str]:
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError([f"override must be key=value, got {item!r}"])
    return key.strip(), value.strip()


@dataclass
class RunConfig:
    grid: Grid
    physics: PhysicalParams
    potential_kind: PotentialKind
    potential_file: str
    initial: InitialSpec
    integrator: IntegratorConfig
    boundary: Boundary
    output_dir: Path
    snapshot_times: tuple
    series_stride: float
    backend: str | None
    values: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @property
    def coefficients(self) -> DCoefficients:
        return derive_coefficients(self.physics)

    def potential(self) -> Potential:
        p = self.physics
        if self.potential_kind is PotentialKind.BOX:
            return Potential.box()
        if self.potential_kind is PotentialKind.HARMONIC:
            return Potential.harmonic(p.mass, p.osc_omega)
        path = Path(self.potential_file)
        if not path.is_absolute():
            path = self.base_dir / path
        table = np.loadtxt(path, delimiter=",", ndmin=2)
        return Potential.tabulated(table[:, 0], to_internal(1.0, "MeV") * table[:, 1])

    def initial_density(self):
        p = self.physics
        return self.initial.density(self.grid.extent_l, p.mass, p.osc_omega)

    def constraint_checks(self) -> dict[str, str]:
        """Dekker and harmonic-condition status; violations warn, never block."""
        c = self.coefficients
        out = {"dekker": check_dekker(c).value}
        p = self.physics
        if self.potential_kind is PotentialKind.HARMONIC and c.gamma > 0 and p.osc_omega > 0:
            ok = check_harmonic_condition(c, c.mass, p.osc_omega, c.gamma)
            out["harmonic"] = (Check.PASS if ok else Check.FAIL).value
            out["harmonic_lhs"] = harmonic_condition_lhs(c, c.mass, p.osc_omega, c.gamma)
        else:
            out["harmonic"] = Check.NOT_APPLICABLE.value
        return out

    def sample_times(self) -> tuple:
        """Series rows every ``series_stride`` plus every snapshot time and t_final."""
        t_end = self.integrator.t_final
        n = int(math.floor(t_end / self.series_stride + 1e-9))
        grid_t = {round(k * self.series_stride, 12) for k in range(n + 1)}
        times = grid_t | {float(t) for t in self.snapshot_times} | {0.0, t_end}
        return tuple(sorted(t for t in times if 0.0 <= t <= t_end))


def resolve(raw: dict[str, str], base_dir: Path | str = ".") -> RunConfig:
    """Validate raw values and build a RunConfig, collecting every problem."""
    problems = []
    vals: dict = {}
    for key in raw:
        if key not in KEYS:
            problems.append(f"unknown key {key!r}")
    fatal = False
    for key, (parse, default) in KEYS.items():
        if key in raw:
            try:
                vals[key] = parse(raw[key])
                continue
            except ValueError as exc:
                problems.append(f"{key}: cannot parse {raw[key]!r} ({exc})")
        elif default is ...:
            problems.append(f"missing required key {key!r}")
        if default is ...:
            fatal = True
        else:
            vals[key] = default
    if fatal:
        raise ConfigError(problems)

    def enum_of(cls, key):
        try:
            return cls(vals[key])
        except ValueError:
            problems.append(f"{key}: {vals[key]!r} is not one of {[m.value for m in cls]}")
            return None

    dxx = enum_of(DxxMode, "physics.dxx")
    pkind = enum_of(PotentialKind, "potential.kind")
    ikind = enum_of(InitialKind, "initial.kind")
    policy = vals["boundary.policy"]
    if policy == "auto":
        boundary = Boundary.MIRROR_NEGATE if pkind is PotentialKind.BOX else Boundary.ZERO_GHOST
    else:
        boundary = enum_of(Boundary, "boundary.policy")
    backend = vals["run.backend"]
    if backend not in ("auto", "numba", "numpy"):
        problems.append(f"run.backend: {backend!r} is not one of ['auto', 'numba', 'numpy']")

    L, n_cells = vals["grid.extent_l"], vals["grid.n_cells"]
    if not L > 0:
        problems.append("grid.extent_l must be > 0")
    if n_cells < MIN_CELLS:
        problems.append(f"grid.n_cells must be >= {MIN_CELLS}, got {n_cells}")

    physics_probe = dict(
        mass_mev=vals["physics.mass"], temperature_mev=vals["physics.temperature"],
        gamma_cfm=vals["physics.gamma"], omega_cutoff_mev=vals["physics.omega_cutoff"],
        osc_omega_cfm=vals["potential.omega"], dxx_mode=dxx or DxxMode.ZERO)
    physics = None
    try:
        physics = PhysicalParams(**physics_probe)
    except ValueError as exc:
        problems.extend(f"physics: {p}" for p in str(exc).split("; "))
    if pkind is PotentialKind.HARMONIC and not vals["potential.omega"] > 0:
        problems.append("potential.omega must be > 0 for the harmonic potential")
    if pkind is PotentialKind.TABULATED and not vals["potential.file"]:
        problems.append("potential.file is required for a tabulated potential")
    if ikind is InitialKind.HARMONIC_EIGENSTATE and pkind is not PotentialKind.HARMONIC:
        problems.append("initial.kind harmonic_eigenstate needs potential.kind = harmonic")

    initial = None
    if ikind is not None:
        try:
            initial = InitialSpec(ikind, vals["initial.n"], vals["initial.a"], vals["initial.b"])
            problems.extend(initial.violations(L if L > 0 else None))
        except ValueError as exc:
            problems.extend(str(exc).split("; "))

    t_final = vals["integrator.t_final"]
    snaps = vals["output.snapshot_times"]
    stride = vals["output.series_stride"]
    if not stride > 0:
        problems.append("output.series_stride must be > 0")
    if any(b <= a for a, b in zip(snaps, snaps[1:])):
        problems.append("output.snapshot_times must be strictly ascending")
    if snaps and (snaps[0] < 0 or snaps[-1] > t_final):
        problems.append("output.snapshot_times must lie in [0, integrator.t_final]")
    integ = None
    try:
        integ = IntegratorConfig(
            t_final=t_final, rel_tol=vals["integrator.rel_tol"],
            abs_tol=vals["integrator.abs_tol"], dt_initial=vals["integrator.dt_initial"],
            dt_min=vals["integrator.dt_min"], max_steps=vals["integrator.max_steps"])
    except ValueError as exc:
        problems.extend(f"integrator: {p}" for p in str(exc).split("; "))

    if problems:
        raise ConfigError(problems)

    resolved = dict(vals)
    resolved["physics.omega_cutoff"] = physics.omega_cutoff_mev
    resolved["boundary.policy"] = boundary.value
    return RunConfig(
        grid=Grid(L, n_cells), physics=physics, potential_kind=pkind,
        potential_file=vals["potential.file"], initial=initial, integrator=integ,
        boundary=boundary, output_dir=Path(vals["output.directory"]),
        snapshot_times=tuple(snaps), series_stride=stride,
        backend=None if backend == "auto" else backend,
        values=resolved, base_dir=Path(base_dir))


def load_config(path, overrides=()) -> RunConfig:
    """Read, apply ``key=value`` overrides and validate a config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror or exc}"]) from exc
    raw = parse_text(text, str(path))
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        raw[key] = value
    return resolve(raw, path.parent)
