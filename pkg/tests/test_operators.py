import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_field, random_solenoidal
from nsaniso import FieldError, ScalarField, VectorField, build_grid, inner, norm
from nsaniso import spectral, stencil
from nsaniso.operators import (
    advect,
    apply_diff,
    divergence,
    divergence_h,
    helmholtz_apply,
    helmholtz_inverse,
    is_solenoidal,
    leray_project,
    max_divergence,
    pressure_potential,
    stokes_solve,
)
from nsaniso.symmetry import symmetry_S

seeds = st.integers(0, 2**32 - 1)
FULL = build_grid(nx=6, ny=5, nz=8, lx=1.2)
HALF = build_grid(nx=6, ny=5, nz=4, lx=1.2, half_domain=True)


# differences ------------------------------------------------------------------------------


@pytest.mark.parametrize("g", [FULL, HALF])
def test_vertical_difference_of_constant(g):
    s = ScalarField(g, "center", np.full(g.shape("center"), 3.0))
    assert np.all(apply_diff(s, "d3").values == 0.0)


def test_horizontal_gradient_of_linear_function():
    g = FULL
    s = ScalarField.from_function(g, "center", lambda x, y, z: x)
    gx, gy = apply_diff(s, "grad_h")
    np.testing.assert_allclose(gx.values[1:-1], 1.0, rtol=1e-13)
    assert np.all(gy.values == 0.0)
    # zero normal flux at walls
    assert np.all(gx.values[0] == 0.0) and np.all(gx.values[-1] == 0.0)


def lap_error(n, lx=1.0, ly=1.5):
    g = build_grid(nx=n, ny=n, nz=4, lx=lx, ly=ly)
    f = lambda x, y, z: np.sin(np.pi * x / lx) * np.sin(np.pi * y / ly)
    # u3 lives at cell centres horizontally: the wall ghost is antisymmetric
    s = ScalarField.from_function(g, "zface", f)
    lap = apply_diff(s, "laplacian_h").values
    exact = -np.pi**2 * (1 / lx**2 + 1 / ly**2) * s.values
    return np.max(np.abs(lap - exact))


def test_horizontal_laplacian_converges_second_order():
    errs = np.array([lap_error(n) for n in (16, 32, 64, 128)])
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders >= 1.9), orders


def test_horizontal_laplacian_on_faces_converges():
    def err(n):
        g = build_grid(nx=n, ny=n, nz=4)
        s = ScalarField.from_function(g, "xface", lambda x, y, z: np.sin(np.pi * x) * np.sin(np.pi * y))
        lap = apply_diff(s, "laplacian_h").values[1:-1]
        return np.max(np.abs(lap + 2 * np.pi**2 * s.values[1:-1]))

    e = np.array([err(n) for n in (16, 32, 64)])
    assert np.all(np.log2(e[:-1] / e[1:]) >= 1.9)


def test_operator_tag_errors():
    s = ScalarField(FULL, "xface", np.zeros(FULL.shape("xface")))
    with pytest.raises(FieldError):
        apply_diff(s, "grad_h")
    with pytest.raises(FieldError):
        apply_diff(s, "div")
    with pytest.raises(FieldError):
        apply_diff(s, "d3")
    with pytest.raises(FieldError):
        apply_diff(VectorField.zeros(FULL), "curl")


@pytest.mark.parametrize("g", [FULL, HALF])
def test_horizontal_divergence_balances_vertical_after_projection(g, rng):
    u = leray_project(random_field(g, rng))
    d3u3 = apply_diff(ScalarField(g, "zface", u.u3), "d3").values
    np.testing.assert_allclose(divergence_h(u), -d3u3, atol=1e-10 * norm(u) / g.min_spacing)


# advection ----------------------------------------------------------------------------------


def test_advection_of_zero(rng):
    v = random_field(FULL, rng)
    assert norm(advect(VectorField.zeros(FULL), v)) == 0.0


def test_constant_transport_of_linear_field():
    g = build_grid(nx=8, ny=8, nz=8)
    u = VectorField(g, np.zeros(g.shape("xface")), np.zeros(g.shape("yface")), np.full(g.shape("zface"), 0.7))
    # v1 = x varies only horizontally: vertical transport gives zero
    v = VectorField.from_functions(g, lambda x, y, z: x, lambda x, y, z: 0 * x, lambda x, y, z: 0 * x)
    assert np.max(np.abs(advect(u, v).u1)) < 1e-14
    # v3 = cos(pi z): the centred transport derivative is exact up to the sin(pi dz)/dz factor
    v = VectorField.from_functions(g, lambda x, y, z: 0 * x, lambda x, y, z: 0 * x, lambda x, y, z: np.cos(np.pi * z))
    zf = g.z_faces()
    expected = -0.7 * np.sin(np.pi * zf) * np.sin(np.pi * g.dz) / g.dz
    np.testing.assert_allclose(advect(u, v).u3, np.broadcast_to(expected, g.shape("zface")), atol=1e-13)


@settings(max_examples=20)
@given(seeds)
def test_advection_is_skew(seed):
    rng = np.random.default_rng(seed)
    u = random_solenoidal(FULL, rng)
    v = random_field(FULL, rng)
    scale = norm(u) * norm(v) ** 2
    assert abs(inner(advect(u, v), v)) <= 1e-11 * scale


def test_advection_skew_direct_sum(rng):
    u = random_solenoidal(FULL, rng)
    v = random_field(FULL, rng)
    n = advect(u, v)
    total = sum(float(np.sum(FULL.weights(loc) * a * b)) for (a, loc), b in zip(n.items(), v.components))
    assert abs(total) <= 1e-11 * norm(u) * norm(v) ** 2


def test_advection_rejects_divergent_velocity(rng):
    with pytest.raises(FieldError):
        advect(random_field(FULL, rng), random_field(FULL, rng))


# projection -----------------------------------------------------------------------------------


@pytest.mark.parametrize("g", [FULL, HALF])
def test_projection_of_random_field(g, rng):
    u = random_field(g, rng)
    p = leray_project(u)
    assert is_solenoidal(p)
    assert norm(p) <= norm(u)


@pytest.mark.parametrize("g", [FULL, HALF])
def test_projection_identity_on_solenoidal(g, rng):
    u = leray_project(random_field(g, rng))
    assert norm(leray_project(u) - u) <= 1e-10 * norm(u)


def test_projection_annihilates_gradient():
    g = FULL
    phi = ScalarField.from_function(g, "center", lambda x, y, z: np.cos(np.pi * z)).values
    grad = VectorField(g, *stencil.gradient(phi, g))
    assert norm(leray_project(grad)) <= 1e-12 * norm(grad)


def test_projection_orthogonal_to_gradients(rng):
    g = FULL
    p = leray_project(random_field(g, rng))
    phi = rng.standard_normal(g.shape("center"))
    grad = VectorField(g, *stencil.gradient(phi, g))
    assert abs(inner(p, grad)) <= 1e-12 * norm(p) * norm(grad)


def test_projection_idempotent_many_trials():
    rng = np.random.default_rng(5)
    g = build_grid(nx=4, ny=5, nz=6)
    for _ in range(200):
        p = leray_project(random_field(g, rng))
        assert norm(leray_project(p) - p) <= 1e-9 * norm(p)


@pytest.mark.parametrize("g", [FULL, HALF])
def test_spectral_and_cg_poisson_agree(g, rng):
    u = random_field(g, rng)
    a = pressure_potential(u, "spectral")
    b = pressure_potential(u, "cg")
    np.testing.assert_allclose(a - a.mean(), b - b.mean(), atol=1e-9 * np.abs(a).max())
    assert is_solenoidal(leray_project(u, method="cg"), rtol=1e-9)


def test_projection_returns_pressure(rng):
    u = random_field(FULL, rng)
    p, phi = leray_project(u, return_pressure=True)
    assert phi.loc == "center"
    assert abs(phi.values.mean()) < 1e-12 * np.abs(phi.values).max()


@settings(max_examples=15)
@given(seeds)
def test_reflection_equivariance(seed):
    u = random_field(FULL, np.random.default_rng(seed))
    scale = norm(u)
    assert norm(leray_project(symmetry_S(u)) - symmetry_S(leray_project(u))) <= 1e-11 * scale
    for op in ("laplacian_h", "d33"):
        lhs = apply_diff(symmetry_S(u), op)
        rhs = symmetry_S(apply_diff(u, op))
        assert norm(lhs - rhs) <= 1e-11 * norm(apply_diff(u, op))


# spectral solvers --------------------------------------------------------------------------


@pytest.mark.parametrize("g", [FULL, HALF])
def test_poisson_solver_inverts_discrete_laplacian(g, rng):
    rhs = rng.standard_normal(g.shape("center"))
    rhs -= rhs.mean()
    phi = spectral.poisson_neumann(rhs, g)
    lap = stencil.divergence(*stencil.gradient(phi, g), g)
    np.testing.assert_allclose(lap, rhs, atol=1e-10 * np.abs(rhs).max())


@pytest.mark.parametrize("shift,a_h,a_v", [(10.0, 1.0, 0.1), (0.0, 0.3, 1.0), (1.0, 1.0, 0.0)])
def test_helmholtz_inverse(shift, a_h, a_v, rng):
    u = random_field(FULL, rng)
    back = helmholtz_apply(helmholtz_inverse(u, shift, a_h, a_v), shift, a_h, a_v)
    assert norm(back - u) <= 1e-11 * norm(u)


def test_stokes_solve_residual(rng):
    g = FULL
    rhs = random_field(g, rng)
    u, info = stokes_solve(rhs, 20.0, 0.1, 0.01)
    assert is_solenoidal(u)
    res = leray_project(helmholtz_apply(u, 20.0, 0.1, 0.01) - rhs)
    assert norm(res) <= 1e-10 * norm(leray_project(rhs))
    assert info.iterations < 40


def test_stokes_solve_of_zero():
    u, info = stokes_solve(VectorField.zeros(FULL), 1.0, 1.0, 1.0)
    assert norm(u) == 0.0 and info.iterations == 0


def test_divergence_scale_definition(rng):
    u = random_field(FULL, rng)
    assert max_divergence(u) == np.max(np.abs(divergence(u)))
