import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import random_field
from nsaniso import FieldError, ScalarField, VectorField, build_grid, inner, norm
from nsaniso.fields import mixed_norm, read_snapshot, write_snapshot

KINDS = ("L2", "H01", "H02", "H1", "mixed(2,4)", "mixed(inf,2)", "mixed(1,1)")

# frozen from tests/oracles.py: sine_norms()
SINE_L2 = 1.0
SINE_H01 = 3.2969083094756146


@pytest.mark.parametrize("kind", KINDS)
def test_zero_field_norms(kind):
    g = build_grid(nx=4, ny=4, nz=4)
    assert norm(VectorField.zeros(g), kind) == 0.0


def test_constant_field_l2():
    g = build_grid(nx=5, ny=4, nz=6)
    u = VectorField(g, np.ones(g.shape("xface")), np.zeros(g.shape("yface")), np.zeros(g.shape("zface")))
    assert math.isclose(norm(u), math.sqrt(2.0), rel_tol=1e-14)


def sine_scalar(n):
    g = build_grid(nx=4, ny=4, nz=n)
    return ScalarField.from_function(g, "center", lambda x, y, z: np.sin(np.pi * z))


@pytest.mark.oracle
def test_sine_oracle_frozen():
    l2, h01 = oracles.sine_norms()
    assert math.isclose(l2, SINE_L2, rel_tol=1e-12)
    assert math.isclose(h01, SINE_H01, rel_tol=1e-12)


@pytest.mark.oracle
def test_sine_norms_converge_to_quadrature():
    g = sine_scalar(256)
    assert abs(norm(g, "L2") - SINE_L2) < 1e-4
    assert abs(norm(g, "H01") - SINE_H01) < 1e-4
    errs = [abs(norm(sine_scalar(n), "H01") - SINE_H01) for n in (32, 64, 128)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_inner_products(rng):
    g = build_grid(nx=5, ny=6, nz=8)
    u, v = random_field(g, rng), random_field(g, rng)
    assert inner(u, VectorField.zeros(g)) == 0.0
    for kind in ("L2", "H01"):
        assert math.isclose(inner(u, u, kind), norm(u, kind) ** 2, rel_tol=1e-13)
        assert math.isclose(inner(u, v, kind), inner(v, u, kind), rel_tol=1e-13)


def test_orthogonal_sinusoids():
    g = build_grid(nx=8, ny=8, nz=16)
    a = ScalarField.from_function(g, "center", lambda x, y, z: np.sin(np.pi * z))
    b = ScalarField.from_function(g, "center", lambda x, y, z: np.sin(2 * np.pi * z))
    direct = float(np.sum(a.values * b.values)) * g.cell_volume
    assert abs(inner(a, b)) < 1e-12
    assert abs(direct) < 1e-12


def test_mismatched_grids_rejected(rng):
    u = random_field(build_grid(nx=4, ny=4, nz=4), rng)
    v = random_field(build_grid(nx=5, ny=4, nz=4), rng)
    with pytest.raises(FieldError):
        inner(u, v)
    with pytest.raises(FieldError):
        u + v


def test_bad_norm_kind_and_exponents(rng):
    u = random_field(build_grid(nx=4, ny=4, nz=4), rng)
    with pytest.raises(FieldError):
        norm(u, "H7")
    with pytest.raises(FieldError):
        norm(u, "mixed(3,2)")


def test_shape_and_finiteness_validated():
    g = build_grid(nx=4, ny=4, nz=4)
    with pytest.raises(FieldError):
        ScalarField(g, "center", np.zeros((4, 4, 5)))
    bad = np.zeros(g.shape("center"))
    bad[0, 0, 0] = np.nan
    with pytest.raises(FieldError):
        ScalarField(g, "center", bad)


def test_half_domain_mixed_matches_l2(rng):
    g = build_grid(nx=5, ny=4, nz=6, half_domain=True)
    u = random_field(g, rng)
    assert math.isclose(mixed_norm(u, 2, 2), norm(u), rel_tol=1e-13)


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_mixed_22_equals_l2(seed):
    g = build_grid(nx=5, ny=6, nz=8)
    u = random_field(g, np.random.default_rng(seed))
    assert math.isclose(norm(u, "mixed(2,2)"), norm(u), rel_tol=1e-13)


@settings(max_examples=40)
@given(seeds, st.sampled_from(KINDS))
def test_triangle_inequality(seed, kind):
    rng = np.random.default_rng(seed)
    g = build_grid(nx=4, ny=5, nz=6)
    u, v = random_field(g, rng), random_field(g, rng)
    assert norm(u + v, kind) <= norm(u, kind) + norm(v, kind) + 1e-12


def test_triangle_inequality_many_trials():
    rng = np.random.default_rng(7)
    g = build_grid(nx=4, ny=4, nz=4)
    for _ in range(1000):
        u, v = random_field(g, rng), random_field(g, rng)
        assert norm(u + v, "H01") <= norm(u, "H01") + norm(v, "H01") + 1e-12


@given(seeds, st.sampled_from(["mixed(inf,2)", "mixed(2,4)"]))
def test_mixed_norms_monotone_under_domination(seed, kind):
    rng = np.random.default_rng(seed)
    g = build_grid(nx=4, ny=5, nz=6)
    small = ScalarField(g, "center", rng.standard_normal(g.shape("center")))
    big = ScalarField(g, "center", np.abs(small.values) + rng.uniform(0, 1, g.shape("center")))
    assert norm(small, kind) <= norm(big, kind) + 1e-14


def test_mixed_norm_order_of_integration():
    g = build_grid(nx=4, ny=4, nz=8)
    # concentrated in one horizontal cell but spread in z, and vice versa
    a = np.zeros(g.shape("center"))
    a[0, 0, :] = 1.0
    b = np.zeros(g.shape("center"))
    b[:, :, 0] = 1.0
    na = norm(ScalarField(g, "center", a), "mixed(inf,2)")
    nb = norm(ScalarField(g, "center", b), "mixed(inf,2)")
    assert math.isclose(na, math.sqrt(g.dx * g.dy))
    assert math.isclose(nb, 1.0)


@pytest.mark.parametrize("half", [False, True])
def test_snapshot_round_trip_bit_identical(tmp_path, rng, half):
    g = build_grid(nx=5, ny=4, nz=6, lx=0.3, ly=1.7, half_domain=half)
    u = random_field(g, rng)
    path = write_snapshot(tmp_path / "u.snap", u)
    back, tag = read_snapshot(path)
    assert tag == "velocity"
    assert back.grid == g
    for a, b in zip(u.components, back.components):
        assert a.tobytes() == b.tobytes()
    header = path.read_bytes().split(b"\n", 1)[0].decode()
    assert header.startswith(f"NSANISO v1 5 4 6 0.3 1.7 {int(half)} velocity")


def test_scalar_snapshot_round_trip(tmp_path, rng):
    g = build_grid(nx=4, ny=4, nz=4)
    s = ScalarField(g, "center", rng.standard_normal(g.shape("center")))
    back, tag = read_snapshot(write_snapshot(tmp_path / "p.snap", s))
    assert tag == "scalar:center"
    assert back.values.tobytes() == s.values.tobytes()


def test_corrupt_snapshot_rejected(tmp_path):
    p = tmp_path / "bad.snap"
    p.write_bytes(b"NOT A SNAPSHOT\n")
    with pytest.raises(FieldError):
        read_snapshot(p)
