"""Adaptive Dormand-Prince 5(4) integration of the semi-discrete system.

The integrator works on raw arrays. ``boundary_fn(u)`` refreshes ghost cells
in place and is applied to every stage state before ``rhs_fn(t, u, out)``
is evaluated. ``interior`` selects the entries the RMS error is averaged
over; entries outside it must have a zero tendency (ghost cells), so they
add nothing to the sum.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import stage_ops

# Dormand & Prince (1980), the RK45 pair of MATLAB ode45 / scipy
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
E = tuple(b5 - b4 for b5, b4 in zip(B5, B4))

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ORDER = 5


class IntegrationAborted(RuntimeError):
    def __init__(self, message: str, t: float, steps: int):
        super().__init__(message)
        self.t = t
        self.steps = steps


@dataclass
class IntegratorConfig:
    t_final: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-8
    sample_times: tuple[float, ...] = ()
    dt_initial: float | None = None
    dt_min: float = 1e-12
    max_steps: int = 10_000_000

    def __post_init__(self):
        self.sample_times = tuple(float(t) for t in self.sample_times)
        errors = self.violations()
        if errors:
            raise ValueError("; ".join(errors))

    def violations(self) -> list[str]:
        out = []
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            out.append("rel_tol and abs_tol must be > 0")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            out.append("t_final must be finite and >= 0")
        if not self.dt_min > 0:
            out.append("dt_min must be > 0")
        if self.dt_initial is not None and not self.dt_initial > 0:
            out.append("dt_initial must be > 0")
        if self.max_steps < 1:
            out.append("max_steps must be >= 1")
        st = self.sample_times
        if any(b <= a for a, b in zip(st, st[1:])):
            out.append("sample_times must be strictly ascending")
        if st and (st[0] < 0 or st[-1] > self.t_final):
            out.append("sample_times must lie in [0, t_final]")
        return out


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0
    dt_last: float = 0.0
    dt_history_min: float = math.inf
    dt_history_max: float = 0.0


_A_ROWS = np.zeros((7, 7))
for _i, _row in enumerate(A):
    _A_ROWS[_i, :len(_row)] = _row
_E = np.array(E)


@dataclass
class _Stepper:
    rhs_fn: object
    boundary_fn: object
    rel_tol: float
    abs_tol: float
    interior: object = None
    backend: str | None = None
    stats: IntegrationStats = field(default_factory=IntegrationStats)

    def __post_init__(self):
        self.k = None
        self._combine, self._error_norm = stage_ops(self.backend)

    def _buffers(self, u):
        if self.k is None or self.k.shape[1:] != u.shape:
            self.k = np.zeros((7,) + u.shape)
            self.stage = np.empty_like(u)
            self.y_new = np.empty_like(u)
            self.count = u[self.interior].size if self.interior is not None else u.size

    def eval(self, t, u, out):
        self.boundary_fn(u)
        self.stats.rhs_evals += 1
        return self.rhs_fn(t, u, out)

    def step(self, t, u, dt, have_k1=False):
        """One DP5(4) step from ``u``; returns (u_new, err). ``u_new`` is a buffer."""
        self._buffers(u)
        k = self.k
        if not have_k1:
            self.eval(t, u, k[0])
        for i in range(1, 6):
            self._combine(self.stage, u, k, _A_ROWS[i], dt)
            self.eval(t + C[i] * dt, self.stage, k[i])
        # the 7th stage is evaluated at the 5th-order solution (FSAL)
        self._combine(self.y_new, u, k, _A_ROWS[6], dt)
        self.eval(t + dt, self.y_new, k[6])
        err = self._error_norm(u, self.y_new, k, _E, dt, self.abs_tol, self.rel_tol, self.count)
        if not math.isfinite(err):
            raise FloatingPointError(f"non-finite stage at t={t:.6g}")
        return self.y_new, err

    def accept(self, u):
        """Swap the new solution into place; returns it. FSAL moves k7 to k1."""
        new = self.y_new
        self.y_new = u
        np.copyto(self.k[0], self.k[6])
        return new


def step(u, t, dt, rhs_fn, boundary_fn=None, rel_tol=1e-8, abs_tol=1e-8, interior=None):
    """Single embedded step. Returns (new array, weighted RMS error estimate)."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    st = _Stepper(_wrap_rhs(rhs_fn), boundary_fn or _noop, rel_tol, abs_tol, interior)
    u = np.array(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    y, err = st.step(t, u, dt)
    return y.copy(), err


def _noop(u):
    return u


def _wrap_rhs(rhs_fn):
    """Accept rhs functions with or without an ``out`` argument."""
    try:
        takes_out = len(inspect.signature(rhs_fn).parameters) >= 3
    except (TypeError, ValueError):
        takes_out = False

    def wrapped(t, u, out):
        res = rhs_fn(t, u, out) if takes_out else rhs_fn(t, u)
        if res is not out:
            out[...] = res
        return out
    return wrapped


def _initial_dt(st: _Stepper, t0, u0, t_end):
    """Hairer-Norsett-Wanner starting step heuristic."""
    sel = st.interior if st.interior is not None else Ellipsis
    f0 = st.eval(t0, u0, np.zeros_like(u0))
    scale = st.abs_tol + st.rel_tol * np.abs(u0[sel])
    d0 = np.sqrt(np.mean((u0[sel] / scale) ** 2))
    d1 = np.sqrt(np.mean((f0[sel] / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_end - t0)
    u1 = u0 + h0 * f0
    f1 = st.eval(t0 + h0, u1, np.zeros_like(u0))
    d2 = np.sqrt(np.mean(((f1[sel] - f0[sel]) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, t_end - t0)


def integrate(u0, cfg: IntegratorConfig, rhs_fn, boundary_fn=None, observer=None,
              t0: float = 0.0, interior=None, stats: IntegrationStats | None = None):
    """Advance ``u0`` from ``t0`` to ``cfg.t_final``.

    ``observer(t, u)`` is called at every sample time and at ``t_final``
    (once, if they coincide) with a read-only view; copy it to keep it.
    Returns the final array.
    """
    boundary_fn = boundary_fn or _noop
    st = _Stepper(_wrap_rhs(rhs_fn), boundary_fn, cfg.rel_tol, cfg.abs_tol, interior)
    if stats is not None:
        st.stats = stats
    u = np.array(u0, dtype=float)
    boundary_fn(u)
    t = float(t0)
    t_end = float(cfg.t_final)
    targets = sorted({s for s in cfg.sample_times if s >= t} | {t_end})

    def notify(time, arr):
        if observer is not None:
            view = arr.view()
            view.flags.writeable = False
            observer(time, view)

    while targets and targets[0] <= t:
        notify(targets.pop(0), u)
    if not targets:
        return u

    dt = cfg.dt_initial if cfg.dt_initial is not None else _initial_dt(st, t, u, t_end)
    have_k1 = False
    steps = 0
    while targets:
        target = targets[0]
        if dt < cfg.dt_min:
            raise IntegrationAborted(
                f"step size {dt:.3e} fell below dt_min={cfg.dt_min:.3e} at t={t:.6g}; "
                "the system is unstable or too stiff for the tolerances", t, steps)
        if steps >= cfg.max_steps:
            raise IntegrationAborted(f"exceeded max_steps={cfg.max_steps} at t={t:.6g}", t, steps)
        steps += 1
        h = dt
        landing = t + h >= target - 1e-12 * max(1.0, abs(target))
        if landing:
            h = target - t
        try:
            y_new, err = st.step(t, u, h, have_k1)
        except FloatingPointError as exc:
            raise IntegrationAborted(str(exc), t, steps) from exc
        if err <= 1.0:
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** (-1.0 / ORDER)))
            u = st.accept(u)
            have_k1 = True
            t = target if landing else t + h
            st.stats.accepted += 1
            st.stats.dt_last = h
            st.stats.dt_history_min = min(st.stats.dt_history_min, h)
            st.stats.dt_history_max = max(st.stats.dt_history_max, h)
            if landing:
                notify(targets.pop(0), u)
                # clipping a step to hit a sample does not shrink the next one
                dt = max(dt, h * factor) if h < dt else h * factor
            else:
                dt = h * factor
        else:
            st.stats.rejected += 1
            factor = max(MIN_FACTOR, SAFETY * err ** (-1.0 / ORDER))
            dt = h * factor
    return u
