import math

import numpy as np
import pytest

import oracles
from helpers import random_solenoidal
from nsaniso import VectorField, build_grid, norm
from nsaniso.eigen import (
    apply_stokes,
    h1_sq,
    poincare_lambda0,
    poincare_lambda0_closed_form,
    project_Pk,
    spectral_bound_ratio,
    stokes_eigenbasis,
)
from nsaniso.fields import l2_sq
from nsaniso.operators import is_solenoidal

# frozen from tests/oracles.py: stokes_dense(4, 4, 4)[:9]
DENSE_4x4x4 = np.array([
    18.745166, 39.44682493, 39.44682493, 39.44682493, 39.44682493,
    41.372583, 41.372583, 42.3422151, 43.64206578,
])


@pytest.fixture(scope="module")
def basis8():
    return stokes_eigenbasis(build_grid(nx=6, ny=6, nz=6, lx=1.3), 12)


@pytest.mark.oracle
def test_dense_oracle_frozen():
    np.testing.assert_allclose(oracles.stokes_dense(4, 4, 4)[:9], DENSE_4x4x4, rtol=1e-8)


@pytest.mark.oracle
def test_eigenvalues_match_dense_oracle_with_multiplicities():
    b = stokes_eigenbasis(build_grid(nx=4, ny=4, nz=4), 8)
    np.testing.assert_allclose(b.eigenvalues, DENSE_4x4x4, rtol=1e-8)


@pytest.mark.oracle
@pytest.mark.parametrize("shape", [(6, 4, 4, 1.5), (4, 4, 6, 1.0)])
def test_eigenvalues_match_dense_oracle(shape):
    nx, ny, nz, lx = shape
    b = stokes_eigenbasis(build_grid(nx=nx, ny=ny, nz=nz, lx=lx), 10)
    np.testing.assert_allclose(b.eigenvalues, oracles.stokes_dense(nx, ny, nz, lx)[:11], rtol=1e-10)


def test_single_mode_residual():
    b = stokes_eigenbasis(build_grid(nx=6, ny=6, nz=4), 1)
    assert len(b) == 2
    assert b.eigenvalues[0] > 0
    r = norm(apply_stokes(b.fields[0]) - b.eigenvalues[0] * b.fields[0])
    assert r <= 1e-8 * b.eigenvalues[0]


def test_basis_postconditions(basis8):
    b = basis8
    assert np.all(np.diff(b.eigenvalues) >= -1e-12)
    assert np.all(b.eigenvalues > 0)
    np.testing.assert_allclose(b.gram(), np.eye(len(b)), atol=1e-10)
    for lam, f, res in zip(b.eigenvalues, b.fields, b.residuals):
        assert res <= 1e-8 * lam
        assert is_solenoidal(f)
        assert not f.u1[0].any() and not f.u1[-1].any()
        assert not f.u2[:, 0].any() and not f.u2[:, -1].any()


def test_mode_cap():
    g = build_grid(nx=4, ny=4, nz=4)
    with pytest.raises(ValueError):
        stokes_eigenbasis(g, 65)
    with pytest.raises(ValueError):
        stokes_eigenbasis(g, 0)


@pytest.mark.oracle
def test_poincare_constant_unit_square():
    g = build_grid(nx=32, ny=32, nz=4)
    exact = 1.0 / oracles.dirichlet_square_eig()
    assert abs(poincare_lambda0(g) - exact) <= 0.02 * exact
    assert math.isclose(poincare_lambda0(g), poincare_lambda0_closed_form(g), rel_tol=1e-10)


def test_first_mode_is_vertical_and_z_constant(basis8):
    f = basis8.fields[0]
    # lowest Stokes mode: u3 = phi(x_h), horizontal components zero
    assert norm(VectorField(f.grid, f.u1, f.u2, 0 * f.u3)) < 1e-8
    assert np.allclose(f.u3, f.u3[:, :, :1], atol=1e-8)
    assert math.isclose(basis8.eigenvalues[0], 1 / basis8.lambda0, rel_tol=1e-8)


def test_projection_of_basis_member(basis8):
    v = basis8.fields[3]
    assert norm(project_Pk(v, basis8, "inside", 5) - v) < 1e-12
    assert norm(project_Pk(v, basis8, "complement", 5)) < 1e-12


def test_projection_of_orthogonal_field(basis8):
    v = basis8.fields[10]
    assert norm(project_Pk(v, basis8, "inside", 5)) < 1e-12


def test_projection_pythagoras_and_sum(basis8, rng):
    u = random_solenoidal(basis8.grid, rng)
    for k in (1, 4, 12):
        inside = project_Pk(u, basis8, "inside", k)
        rest = project_Pk(u, basis8, "complement", k)
        assert norm(inside + rest - u) <= 1e-14 * norm(u)
        assert math.isclose(l2_sq(u), l2_sq(inside) + l2_sq(rest), rel_tol=1e-10)


def test_spectral_bound(basis8, rng):
    u = random_solenoidal(basis8.grid, rng)
    for k in (1, 5, 11):
        assert spectral_bound_ratio(u, basis8, k) <= 1.05
    pk = project_Pk(u, basis8, "inside", 5)
    assert h1_sq(pk) <= basis8.eigenvalues[5] * l2_sq(u) * 1.05


def test_projection_grid_mismatch(basis8):
    with pytest.raises(Exception):
        project_Pk(VectorField.zeros(build_grid(nx=4, ny=4, nz=4)), basis8)


@pytest.mark.oracle
def test_vertical_weight_shifts_spectrum():
    g = build_grid(nx=4, ny=4, nz=4)
    iso = stokes_eigenbasis(g, 4)
    aniso = stokes_eigenbasis(g, 4, vertical_weight=0.1)
    np.testing.assert_allclose(aniso.eigenvalues, oracles.stokes_dense(4, 4, 4, vertical_weight=0.1)[:5], rtol=1e-10)
    assert aniso.eigenvalues[1] < iso.eigenvalues[1]
