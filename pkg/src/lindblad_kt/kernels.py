"""Backend selection for the right-hand side.

``LINDBLAD_KT_BACKEND=numba`` (default when numba imports) runs a fused
compiled kernel; ``LINDBLAD_KT_BACKEND=numpy`` runs the array code in
:mod:`lindblad_kt.scheme`. Both produce the same tendency to rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import model
from .grid import Grid
from .params import DCoefficients
from .scheme import rhs_numpy

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

ENV_FLAG = "LINDBLAD_KT_BACKEND"
BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    choice = os.environ.get(ENV_FLAG, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice not in ("", "numba"):
        raise ValueError(f"{ENV_FLAG} must be one of {BACKENDS}, got {choice!r}")
    return "numba" if HAS_NUMBA else "numpy"


class NonFiniteTendency(FloatingPointError):
    pass


def _check_finite(du: np.ndarray, grid: Grid) -> None:
    if math.isfinite(float(du.sum())):
        return
    c, j, k = np.argwhere(~np.isfinite(du))[0]
    g = grid.ghost_width
    xc = grid.centers_with_ghosts
    comp = "rho_I" if c == 0 else "rho_R"
    raise NonFiniteTendency(
        f"non-finite tendency in {comp} at cell ({j - g}, {k - g}), "
        f"x={xc[j]:.6g} fm, y={xc[k]:.6g} fm"
    )


if HAS_NUMBA:

    @njit(cache=True)
    def _minmod(a, b):
        if a * b > 0.0:
            if a > 0.0:
                return min(a, b)
            return max(a, b)
        return 0.0

    @njit(cache=True)
    def _rhs_kernel(u, dx, xc, xf, vc, gamma, dpx, dpp, dxx, k2m, sx, sy, hx, hy, px, py, out):
        g = 2
        n = xc.size
        m_tot = n + 2 * g
        h = 0.5 * dx
        idx = 1.0 / dx
        speed = math.sqrt(4.0 * dpx * dpx + gamma * gamma)

        for c in range(2):
            for i in range(1, m_tot - 1):
                for j in range(m_tot):
                    sx[c, i, j] = _minmod((u[c, i + 1, j] - u[c, i, j]) * idx,
                                          (u[c, i, j] - u[c, i - 1, j]) * idx)
            for i in range(m_tot):
                for j in range(1, m_tot - 1):
                    sy[c, i, j] = _minmod((u[c, i, j + 1] - u[c, i, j]) * idx,
                                          (u[c, i, j] - u[c, i, j - 1]) * idx)

        # x-interfaces m between cells g-1+m and g+m, at (xf[m], xc[k])
        for m in range(n + 1):
            lo = g - 1 + m
            hi = g + m
            for k in range(n):
                col = g + k
                r = xf[m] - xc[k]
                drift = -2.0 * dpx * r
                damp = gamma * r
                a = abs(r) * speed
                mi = u[0, lo, col] + h * sx[0, lo, col]
                mr = u[1, lo, col] + h * sx[1, lo, col]
                pi_ = u[0, hi, col] - h * sx[0, hi, col]
                pr = u[1, hi, col] - h * sx[1, hi, col]
                f0 = (drift * pr + damp * pi_) + (drift * mr + damp * mi)
                f1 = (-drift * pi_ + damp * pr) + (-drift * mi + damp * mr)
                hx[0, m, k] = 0.5 * f0 - 0.5 * a * (pi_ - mi)
                hx[1, m, k] = 0.5 * f1 - 0.5 * a * (pr - mr)

                d0 = (u[0, hi, col] - u[0, lo, col]) * idx
                d1 = (u[1, hi, col] - u[1, lo, col]) * idx
                q0 = (k2m * d1 + dxx * (d0 + sy[0, lo, col])) + (k2m * d1 + dxx * (d0 + sy[0, hi, col]))
                q1 = (-k2m * d0 + dxx * (d1 + sy[1, lo, col])) + (-k2m * d0 + dxx * (d1 + sy[1, hi, col]))
                px[0, m, k] = 0.5 * q0
                px[1, m, k] = 0.5 * q1

        # y-interfaces m between cells g-1+m and g+m, at (xc[j], xf[m])
        for j in range(n):
            row = g + j
            for m in range(n + 1):
                lo = g - 1 + m
                hi = g + m
                r = xc[j] - xf[m]
                drift = -2.0 * dpx * r
                damp = -(gamma * r)
                a = abs(r) * speed
                mi = u[0, row, lo] + h * sy[0, row, lo]
                mr = u[1, row, lo] + h * sy[1, row, lo]
                pi_ = u[0, row, hi] - h * sy[0, row, hi]
                pr = u[1, row, hi] - h * sy[1, row, hi]
                f0 = (drift * pr + damp * pi_) + (drift * mr + damp * mi)
                f1 = (-drift * pi_ + damp * pr) + (-drift * mi + damp * mr)
                hy[0, j, m] = 0.5 * f0 - 0.5 * a * (pi_ - mi)
                hy[1, j, m] = 0.5 * f1 - 0.5 * a * (pr - mr)

                d0 = (u[0, row, hi] - u[0, row, lo]) * idx
                d1 = (u[1, row, hi] - u[1, row, lo]) * idx
                q0 = (-k2m * d1 + dxx * (d0 + sx[0, row, lo])) + (-k2m * d1 + dxx * (d0 + sx[0, row, hi]))
                q1 = (k2m * d0 + dxx * (d1 + sx[1, row, lo])) + (k2m * d0 + dxx * (d1 + sx[1, row, hi]))
                py[0, j, m] = 0.5 * q0
                py[1, j, m] = 0.5 * q1

        for j in range(n):
            for k in range(n):
                r = xc[j] - xc[k]
                dv = vc[j] - vc[k]
                loss = 2.0 * gamma - dpp * (r * r)
                ui = u[0, g + j, g + k]
                ur = u[1, g + j, g + k]
                s0 = -dv * ur + loss * ui
                s1 = dv * ui + loss * ur
                for c in range(2):
                    adv_x = -(hx[c, j + 1, k] - hx[c, j, k]) * idx
                    adv_y = -(hy[c, j, k + 1] - hy[c, j, k]) * idx
                    dif_x = (px[c, j + 1, k] - px[c, j, k]) * idx
                    dif_y = (py[c, j, k + 1] - py[c, j, k]) * idx
                    src = s0 if c == 0 else s1
                    out[c, g + j, g + k] = ((adv_x + adv_y) + (dif_x + dif_y)) + src


def make_rhs(grid: Grid, pot: model.Potential, c: DCoefficients, backend: str | None = None,
             check_finite: bool = True):
    """Build ``rhs_fn(t, u, out=None)`` for a fixed grid, potential and coefficients.

    ``u`` must have its ghosts filled. The returned tendency has zero ghosts.
    """
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    vc = np.ascontiguousarray(model.potential_eval(pot, grid.centers), dtype=float)

    if backend == "numpy":
        def rhs_fn(t, u, out=None):
            du = rhs_numpy(u, grid, c, vc, out=out)
            if check_finite:
                _check_finite(du, grid)
            return du
        rhs_fn.backend = "numpy"
        return rhs_fn

    n = grid.n_cells
    g = grid.ghost_width
    xc = np.ascontiguousarray(grid.centers)
    xf = np.ascontiguousarray(grid.interfaces)
    sx = np.zeros(grid.shape)
    sy = np.zeros(grid.shape)
    hx = np.empty((2, n + 1, n))
    px = np.empty((2, n + 1, n))
    hy = np.empty((2, n, n + 1))
    py = np.empty((2, n, n + 1))
    args = (grid.dx, xc, xf, vc, float(c.gamma), float(c.d_px), float(c.d_pp),
            float(c.d_xx), 0.5 / c.mass)

    def rhs_fn(t, u, out=None):
        if out is None:
            out = np.zeros(grid.shape)
        else:
            # the kernel writes physical cells only
            out[:, :g, :] = 0.0
            out[:, -g:, :] = 0.0
            out[:, :, :g] = 0.0
            out[:, :, -g:] = 0.0
        _rhs_kernel(u, *args, sx, sy, hx, hy, px, py, out)
        if check_finite:
            _check_finite(out, grid)
        return out

    rhs_fn.backend = "numba"
    return rhs_fn


# --- Runge-Kutta stage arithmetic -------------------------------------------


def _combine_numpy(out, u, k, weights, dt):
    np.copyto(out, u)
    for j in range(weights.size):
        if weights[j] != 0.0:
            out += (dt * weights[j]) * k[j]
    return out


def _error_norm_numpy(u, y, k, weights, dt, atol, rtol, count):
    err = np.zeros_like(u)
    for j in range(weights.size):
        if weights[j] != 0.0:
            err += (dt * weights[j]) * k[j]
    scale = atol + rtol * np.maximum(np.abs(u), np.abs(y))
    return math.sqrt(float(np.sum((err / scale) ** 2)) / count)


if HAS_NUMBA:

    @njit(cache=True)
    def _combine_numba(out, u, k, weights, dt):
        of = out.reshape(-1)
        uf = u.reshape(-1)
        kf = k.reshape(k.shape[0], -1)
        of[:] = uf
        for j in range(weights.size):
            w = dt * weights[j]
            if w != 0.0:
                kj = kf[j]
                for i in range(of.size):
                    of[i] += w * kj[i]
        return out

    @njit(cache=True)
    def _error_norm_numba(u, y, k, weights, dt, atol, rtol, count):
        uf = u.reshape(-1)
        yf = y.reshape(-1)
        kf = k.reshape(k.shape[0], -1)
        e = np.zeros(uf.size)
        for j in range(weights.size):
            w = dt * weights[j]
            if w != 0.0:
                kj = kf[j]
                for i in range(e.size):
                    e[i] += w * kj[i]
        total = 0.0
        for i in range(e.size):
            s = atol + rtol * max(abs(uf[i]), abs(yf[i]))
            total += (e[i] / s) ** 2
        return math.sqrt(total / count)


def stage_ops(backend: str | None = None):
    """Return (combine, error_norm) implementations for the chosen backend.

    ``combine(out, u, k, w, dt)`` sets ``out = u + dt * sum_j w[j] k[j]``.
    ``error_norm`` returns the weighted RMS of ``dt * sum_j w[j] k[j]`` over
    ``count`` entries; entries where that sum is 0 (ghost cells) add nothing.
    """
    backend = backend or default_backend()
    if backend == "numba" and HAS_NUMBA:
        return _combine_numba, _error_norm_numba
    return _combine_numpy, _error_norm_numpy
