import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lindblad_kt import kernels, scheme
from lindblad_kt.grid import Boundary, State, build_grid, fill_ghosts, init_from_density
from lindblad_kt.initial import InitialSpec
from lindblad_kt.model import Potential, potential_eval
from lindblad_kt.params import DCoefficients, PhysicalParams, derive_coefficients

from conftest import M
from oracles import direct_fd_rhs, manufactured_rho

BATH = derive_coefficients(PhysicalParams(470.0, 300.0, 0.5, dxx_mode="thermal"))
VN = DCoefficients.von_neumann(M)


def central(a, b):
    return 0.5 * (a + b)


def random_hermitian(grid, rng, policy=Boundary.ZERO_GHOST):
    n = grid.n_cells
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    s = State.zeros(grid)
    s.physical[1] = a + a.T
    s.physical[0] = b - b.T
    fill_ghosts(s.u, policy)
    return s


# --- limiter -----------------------------------------------------------------

@pytest.mark.parametrize("a,b,expected", [(1, 2, 1), (1, -2, 0), (-3, -2, -2), (0, 5, 0),
                                          (2, 1, 1), (-1, -4, -1), (0, 0, 0), (3, 3, 3)])
def test_minmod_table(a, b, expected):
    assert scheme.minmod(a, b) == expected
    assert kernels._minmod(float(a), float(b)) == expected


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_minmod_properties(a, b):
    m = scheme.minmod(a, b)
    assert abs(m) <= min(abs(a), abs(b))
    assert m == scheme.minmod(b, a)
    assert scheme.minmod(-a, -b) == -m
    assert kernels._minmod(a, b) == m
    if a * b <= 0:
        assert m == 0


def test_limited_derivatives_linear_extremum_step():
    g = build_grid(8.0, 8)
    xg = g.centers_with_ghosts
    u = np.zeros(g.shape)
    u[1] = 3.0 * xg[:, None] + 0 * xg[None, :]
    ws = scheme.limited_derivatives(u, g.dx)
    assert np.allclose(ws.limited_dx[1, 1:-1, :], 3.0, rtol=1e-12)
    assert not ws.limited_dy[1].any()

    u = np.zeros(g.shape)
    u[0, 5, :] = 1.0                       # isolated peak in x
    ws = scheme.limited_derivatives(u, g.dx)
    assert not ws.limited_dx[0, 5].any()

    u = np.zeros(g.shape)
    u[0, 6:, :] = 1.0                      # step between cells 5 and 6
    ws = scheme.limited_derivatives(u, g.dx)
    assert not ws.limited_dx[0, 5].any() and not ws.limited_dx[0, 6].any()
    ws = scheme.reconstruct(u, ws, g.dx)
    m = 6 - 2                              # interface between array cells 5 and 6
    assert np.all(ws.x_minus[0, m] == 0.0) and np.all(ws.x_plus[0, m] == 1.0)


def test_reconstruct_constant_and_linear():
    g = build_grid(8.0, 8)
    u = np.full(g.shape, 2.5)
    ws = scheme.reconstruct(u, scheme.limited_derivatives(u, g.dx), g.dx)
    for arr in (ws.x_minus, ws.x_plus, ws.y_minus, ws.y_plus):
        assert np.all(arr == 2.5)
    xg = g.centers_with_ghosts
    u = np.zeros(g.shape)
    u[1] = 0.7 * xg[:, None] - 0.2 * xg[None, :]
    ws = scheme.reconstruct(u, scheme.limited_derivatives(u, g.dx), g.dx)
    exact_x = 0.7 * g.interfaces[:, None] - 0.2 * g.centers[None, :]
    assert np.allclose(ws.x_minus[1], exact_x, atol=1e-12)
    assert np.allclose(ws.x_plus[1], exact_x, atol=1e-12)
    exact_y = 0.7 * g.centers[:, None] - 0.2 * g.interfaces[None, :]
    assert np.allclose(ws.y_minus[1], exact_y, atol=1e-12)
    assert np.allclose(ws.y_plus[1], exact_y, atol=1e-12)


# --- numerical fluxes --------------------------------------------------------

def test_advection_numerical_flux_examples():
    c = DCoefficients(3.62115, -0.125, 0.0, 0.5, M)
    u = np.array([0.3, -0.4])
    assert scheme.advection_numerical_flux("x", 2.0, 0.0, u, u, c) == pytest.approx(
        [-2 * -0.125 * 2 * -0.4 + 0.5 * 2 * 0.3, 2 * -0.125 * 2 * 0.3 + 0.5 * 2 * -0.4])
    assert not scheme.advection_numerical_flux("y", 1.0, 1.0, u, 2 * u, c).any()
    h = scheme.advection_numerical_flux("x", 2.0, 0.0, np.array([0.0, 1.0]), np.zeros(2), c)
    assert h == pytest.approx([0.25, 0.5 - 0.5 * math.sqrt(1.25)], abs=1e-14)
    assert h[1] == pytest.approx(-0.059017, abs=5e-7)


def test_diffusion_numerical_flux_examples():
    c = DCoefficients(0.0, 0.0, 0.0, 0.0, M)
    z = np.zeros((2, 3))
    p = scheme.diffusion_numerical_flux("x", np.ones((2, 3)), np.ones((2, 3)), z, z, 0.1, c)
    assert not p.any()
    lo = np.array([[0.0], [1.0]])
    hi = np.array([[0.0], [1.0 + 0.2 * 0.1]])     # rho_R = 0.2 x, dx = 0.1
    p = scheme.diffusion_numerical_flux("x", lo, hi, z[:, :1], z[:, :1], 0.1, c)
    assert p[:, 0] == pytest.approx([0.2 / (2 * M), 0.0], rel=1e-12)


def test_diffusion_reduces_to_central_laplacian():
    # drop the von Neumann coupling (infinite mass) and keep only D_xx
    c = DCoefficients(0.0, 0.0, 0.37, 0.0, math.inf)
    g = build_grid(10.0, 12)
    rng = np.random.default_rng(3)
    row = rng.standard_normal(g.n_cells + 4)
    u = np.zeros(g.shape)
    u[1] = row[:, None]
    u[0] = -2.0 * row[:, None]
    du = scheme.rhs_numpy(u, g, c, np.zeros(g.n_cells))
    lap = (row[3:-1] - 2 * row[2:-2] + row[1:-3]) / g.dx**2
    for comp, scale in ((1, 1.0), (0, -2.0)):
        assert np.allclose(du[comp, 2:-2, 3:-3], 0.37 * scale * lap[:, None], rtol=1e-10, atol=1e-10)


# --- assembled right-hand side --------------------------------------------------

@pytest.mark.parametrize("backend", kernels.BACKENDS)
def test_zero_state_zero_tendency(backend):
    g = build_grid(20.0, 16)
    fn = kernels.make_rhs(g, Potential.harmonic(M, 0.5), BATH, backend)
    du = fn(0.0, np.zeros(g.shape))
    assert not du.any()


@pytest.mark.parametrize("backend", kernels.BACKENDS)
@pytest.mark.parametrize("policy", list(Boundary))
def test_hermiticity_exact(backend, policy, rng):
    g = build_grid(20.0, 24)
    s = random_hermitian(g, rng, policy)
    du = kernels.make_rhs(g, Potential.harmonic(M, 0.5), BATH, backend)(0.0, s.u)
    phys = du[g.interior]
    assert np.array_equal(phys[1], phys[1].T)
    assert np.array_equal(phys[0], -phys[0].T)


@pytest.mark.parametrize("policy", list(Boundary))
def test_backends_agree(policy, rng):
    g = build_grid(30.0, 40)
    u = rng.standard_normal(g.shape)
    fill_ghosts(u, policy)
    pot = Potential.harmonic(M, 0.3)
    a = kernels.make_rhs(g, pot, BATH, "numpy")(0.0, u)
    b = kernels.make_rhs(g, pot, BATH, "numba")(0.0, u)
    assert np.array_equal(a, b)


def test_numba_clears_ghosts_of_out(rng):
    g = build_grid(20.0, 16)
    u = rng.standard_normal(g.shape)
    out = np.full(g.shape, 9.0)
    kernels.make_rhs(g, Potential.box(), BATH, "numba")(0.0, u, out)
    mask = np.ones(g.shape, bool)
    mask[g.interior] = False
    assert not out[mask].any()


def test_homogeneity(rng):
    g = build_grid(20.0, 20)
    fn = kernels.make_rhs(g, Potential.harmonic(M, 0.5), BATH)
    u = rng.standard_normal(g.shape)
    base = fn(0.0, u).copy()
    for alpha in (-3.0, 0.5, 2.0, -0.125):
        assert np.allclose(fn(0.0, alpha * u), alpha * base, rtol=1e-12, atol=1e-12 * np.abs(base).max())


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_linearity_with_linear_limiter(alpha, beta, seed):
    # MinMod is nonlinear by design; with a linear slope rule every other stage is linear
    g = build_grid(20.0, 12)
    r = np.random.default_rng(seed)
    u1, u2 = r.standard_normal(g.shape), r.standard_normal(g.shape)
    vc = potential_eval(Potential.harmonic(M, 0.5), g.centers)

    def f(u):
        return scheme.rhs_numpy(u, g, BATH, vc, limiter=central)

    lhs = f(alpha * u1 + beta * u2)
    rhs = alpha * f(u1) + beta * f(u2)
    scale = np.abs(f(u1)).max() + np.abs(f(u2)).max()
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


def test_interior_fluxes_telescope(rng):
    g = build_grid(20.0, 30)
    u = rng.standard_normal(g.shape)
    fill_ghosts(u, Boundary.MIRROR_NEGATE)
    c = BATH
    hx, hy, px, py = scheme.interface_fluxes(u, g, c)
    du = scheme.rhs_numpy(u, g, c, np.zeros(g.n_cells))
    x = g.centers
    loss = 2 * c.gamma - c.d_pp * (x[:, None] - x[None, :]) ** 2
    phys = u[g.interior]
    flux_part = du[g.interior] - np.stack([loss * phys[0], loss * phys[1]])
    total = flux_part.sum(axis=(1, 2)) * g.dx
    wall = (-(hx[:, -1, :] - hx[:, 0, :]).sum(axis=1) - (hy[:, :, -1] - hy[:, :, 0]).sum(axis=1)
            + (px[:, -1, :] - px[:, 0, :]).sum(axis=1) + (py[:, :, -1] - py[:, :, 0]).sum(axis=1))
    scale = sum(np.abs(a).sum() for a in (hx, hy, px, py))
    assert np.abs(total - wall).max() <= 1e-12 * scale


@pytest.mark.parametrize("n_state", [1, 2, 5, 10, 15])
@pytest.mark.parametrize("n_cells", [50, 100, 200])
def test_box_eigenstate_stationary(n_state, n_cells):
    # sampled eigenstates are exact eigenvectors of the central stencil with
    # mirrored ghosts, so the tendency is pure rounding (a stronger statement
    # than second-order decay)
    g = build_grid(40.0, n_cells)
    s = init_from_density(g, InitialSpec("box_eigenstate", n=n_state).density(40.0), "mirror_negate")
    du = kernels.make_rhs(g, Potential.box(), VN)(0.0, s.u)
    scale = np.abs(s.u).max() / (2 * M * g.dx**2)
    assert np.abs(du).max() < 1e-13 * scale


def test_von_neumann_matches_direct_fd_exactly():
    # same central stencils on both sides, so only rounding separates them
    g = build_grid(20.0, 64)
    xg = g.centers_with_ghosts
    f = manufactured_rho(xg[:, None], xg[None, :])
    u = np.stack([f.imag, f.real])
    pot = Potential.harmonic(M, 0.5)
    du = scheme.rhs_numpy(u, g, VN, potential_eval(pot, g.centers))
    ref = direct_fd_rhs(manufactured_rho, g.centers[:, None], g.centers[None, :], g.dx, VN, pot)
    assert np.abs(du[1][g.interior[1:]] - ref.real).max() < 1e-11
    assert np.abs(du[0][g.interior[1:]] - ref.imag).max() < 1e-11


def test_central_limiter_second_order_on_localized_field():
    pot = Potential.harmonic(M, 0.5)
    errs = []
    for n in (100, 200, 400):
        g = build_grid(20.0, n)
        xg = g.centers_with_ghosts
        f = manufactured_rho(xg[:, None], xg[None, :])
        du = scheme.rhs_numpy(np.stack([f.imag, f.real]), g, BATH,
                              potential_eval(pot, g.centers), limiter=central)
        ref = direct_fd_rhs(manufactured_rho, g.centers[:, None], g.centers[None, :], g.dx, BATH, pot)
        errs.append(max(np.abs(du[1][g.interior[1:]] - ref.real).max(),
                        np.abs(du[0][g.interior[1:]] - ref.imag).max()))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.0 < r < 5.0 for r in ratios), ratios


def test_non_finite_tendency_names_cell():
    g = build_grid(20.0, 16)
    u = np.zeros(g.shape)
    u[1, 7, 9] = np.nan
    for backend in kernels.BACKENDS:
        with pytest.raises(kernels.NonFiniteTendency, match=r"cell \("):
            kernels.make_rhs(g, Potential.box(), BATH, backend)(0.0, u)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv(kernels.ENV_FLAG, "numpy")
    assert kernels.default_backend() == "numpy"
    g = build_grid(20.0, 8)
    assert kernels.make_rhs(g, Potential.box(), VN).backend == "numpy"
    monkeypatch.setenv(kernels.ENV_FLAG, "numba")
    assert kernels.default_backend() == "numba"
    monkeypatch.setenv(kernels.ENV_FLAG, "fortran")
    with pytest.raises(ValueError):
        kernels.default_backend()
    monkeypatch.delenv(kernels.ENV_FLAG)
    assert kernels.default_backend() == "numba"
    with pytest.raises(ValueError):
        kernels.make_rhs(g, Potential.box(), VN, backend="cuda")


def test_rhs_state_wrapper():
    g = build_grid(20.0, 16)
    s = init_from_density(g, InitialSpec("gaussian").density(20.0), "zero_ghost")
    t = scheme.rhs(s, Potential.box(), BATH, backend="numpy")
    assert isinstance(t, State) and t.u.shape == g.shape
    assert np.array_equal(t.u, kernels.make_rhs(g, Potential.box(), BATH, "numba")(0.0, s.u))
