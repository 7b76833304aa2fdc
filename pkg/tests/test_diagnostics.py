import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from nsaniso import ScalarField, VectorField, build_grid
from nsaniso.diagnostics import (
    EmpiricalConstants,
    anisotropic_ratios,
    c3_from_c2,
    cauchy_gap,
    energy_balance_residual,
    estimate_C0,
    estimate_constants,
    h02_propagation_check,
    poincare_decay_check,
    remark_quantity,
    thm2_bound,
    threshold_remark,
    threshold_thm1,
    threshold_thm2,
)
from nsaniso.eigen import poincare_lambda0, stokes_eigenbasis
from nsaniso.fields import d3_sq, l2_sq
from nsaniso.initial import anisotropic, smooth_modes
from nsaniso.ledger import EnergyLedger
from nsaniso.solver import SolverParams, solve_nse, solve_stokes_linear

# frozen from tests/oracles.py: separable_ratios()
SEPARABLE_RATIOS = (0.5810495835631542, 0.4942355557669272)


@pytest.fixture(scope="module")
def grid():
    return build_grid(nx=8, ny=8, nz=8)


@pytest.fixture(scope="module")
def u0(grid):
    return smooth_modes(grid, amplitude=1.0, seed=5)


@pytest.fixture(scope="module")
def first_mode():
    g = build_grid(nx=8, ny=8, nz=8)
    basis = stokes_eigenbasis(g, 1)
    return basis.fields[0], basis.eigenvalues[0]


def h01(u):
    return math.sqrt(l2_sq(u) + d3_sq(u))


@pytest.mark.oracle
def test_separable_ratio_oracle_is_frozen():
    assert oracles.separable_ratios() == pytest.approx(SEPARABLE_RATIOS, rel=1e-12)


@pytest.mark.oracle
def test_ratios_of_separable_scalar_match_quadrature():
    g = build_grid(nx=32, ny=32, nz=32)
    x, y, z = g.mesh("center")
    values = np.sin(np.pi * x) * np.sin(np.pi * y) * oracles.profile(z)
    r1, r2 = anisotropic_ratios(ScalarField(g, "center", values))
    assert r1 == pytest.approx(SEPARABLE_RATIOS[0], rel=1e-2)
    assert r2 == pytest.approx(SEPARABLE_RATIOS[1], rel=1e-2)


def test_estimate_C0_bounds_every_sample():
    g = build_grid(nx=8, ny=8, nz=8)
    res = estimate_C0(g, n_samples=100, seed=2)
    assert np.nanmax(res["ratio1"]) <= res["C0_est"]
    assert np.nanmax(res["ratio2"]) <= res["C0_est"]
    with pytest.raises(ValueError):
        estimate_C0(g, n_samples=50)


def test_estimate_constants_positive_and_c3_formula():
    g = build_grid(nx=8, ny=8, nz=8)
    c = estimate_constants(g, n_samples=100, n_pairs=6, seed=1)
    assert c.C0_est > 0 and c.C1_est > 0 and c.C2_est > 0
    assert c.C3_est == max(c.C2_est**2 / 2, 27 * c.C2_est**4 / 32)
    assert c.grid_signature == g.signature
    assert c.lambda0 == poincare_lambda0(g)
    again = estimate_constants(g, n_samples=100, n_pairs=6, seed=1)
    assert again.as_dict() == c.as_dict()


@given(st.floats(min_value=1e-3, max_value=10.0))
def test_c3_formula(c2):
    assert c3_from_c2(c2) == max(c2 * c2 / 2, 27 * c2**4 / 32)


FIXED = EmpiricalConstants.fixed(C0=1.0, C1=0.5, C2=1.0)


@pytest.mark.parametrize("nu", [0.05, 1.0])
def test_threshold_thm1_arithmetic(u0, nu):
    inside = u0 * (nu / (64 * FIXED.C1_est) / h01(u0))
    outside = u0 * (nu / FIXED.C1_est / h01(u0))
    assert threshold_thm1(inside, nu, FIXED).passed
    assert not threshold_thm1(outside, nu, FIXED).passed
    assert threshold_thm1(VectorField.zeros(u0.grid), nu, FIXED).passed


@given(st.floats(min_value=1e-4, max_value=1e4), st.floats(min_value=1e-3, max_value=10.0))
def test_zero_data_always_admissible(c1, nu):
    zero = VectorField.zeros(build_grid(nx=4, ny=4, nz=4))
    consts = EmpiricalConstants.fixed(C1=c1, C2=c1)
    assert threshold_thm1(zero, nu, consts).passed
    res, b0 = threshold_thm2(zero, nu, consts)
    assert res.passed and b0 == 0.0
    assert threshold_remark(zero, nu, consts).passed


def _remark_equality_scale(u, nu, c3):
    # solve c3 s^2 l (nu/2 + s^2 d / nu) = nu^2 for s^2
    l, d = l2_sq(u), d3_sq(u)
    a, b, c = c3 * l * d / nu, c3 * l * nu / 2, -nu * nu
    return math.sqrt((-b + math.sqrt(b * b - 4 * a * c)) / (2 * a))


def test_threshold_remark_arithmetic(u0):
    nu = 0.3
    s = _remark_equality_scale(u0, nu, FIXED.C3_est)
    at = u0 * s
    assert remark_quantity(math.sqrt(l2_sq(at)), math.sqrt(d3_sq(at)), nu, FIXED.C3_est) == pytest.approx(nu * nu)
    assert threshold_remark(u0 * (0.99 * s), nu, FIXED).passed
    assert not threshold_remark(u0 * (1.01 * s), nu, FIXED).passed


def test_thm2_true_while_thm1_false_for_anisotropic_family():
    g = build_grid(nx=8, ny=8, nz=16)
    consts = EmpiricalConstants.fixed(C1=1.0, C2=1.0)
    nu = 1.0
    for eta in (0.1, 0.05):
        u = anisotropic(g, eta, 0.25, amplitude=0.5)
        assert math.sqrt(l2_sq(u)) == pytest.approx(0.5 * eta**0.25)
        assert math.sqrt(d3_sq(u)) == pytest.approx(0.5 * eta**-0.25)
        assert not threshold_thm1(u, nu, consts).passed
        res, b0 = threshold_thm2(u, nu, consts)
        assert res.passed and b0 > 0


def test_thm2_bound_nan_outside_condition():
    assert math.isnan(thm2_bound(10.0, 10.0, 0.1, 1.0))
    assert thm2_bound(1.0, 0.0, 0.1, 1.0) == 0.0


def test_thresholds_are_deterministic(u0):
    consts = EmpiricalConstants.fixed(C1=0.01, C2=0.2)
    first = [threshold_thm1(u0, 0.1, consts), threshold_thm2(u0, 0.1, consts)[0], threshold_remark(u0, 0.1, consts)]
    second = [threshold_thm1(u0, 0.1, consts), threshold_thm2(u0, 0.1, consts)[0], threshold_remark(u0, 0.1, consts)]
    assert [r.row() for r in first] == [r.row() for r in second]


@pytest.fixture(scope="module")
def smooth_run(u0):
    return solve_nse(u0 * 0.5, SolverParams(nu_h=0.1, eps=0.01, dt=0.01, t_end=0.2))


def test_energy_balance_of_zero_run(grid):
    traj = solve_nse(VectorField.zeros(grid), SolverParams(nu_h=0.1, eps=0.01, dt=0.1, t_end=0.5))
    assert energy_balance_residual(traj) == 0.0
    assert energy_balance_residual(traj, mode="trapezoid") == 0.0


def test_trapezoid_balance_is_first_order(u0):
    res = []
    for dt in (0.02, 0.01):
        traj = solve_stokes_linear(u0, SolverParams(nu_h=0.1, eps=0.05, dt=dt, t_end=0.2, advection=False))
        res.append(energy_balance_residual(traj, mode="trapezoid"))
        assert energy_balance_residual(traj) <= 1e-9
    # per-step residual of an O(dt) scheme against the continuous identity is O(dt^2)
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.15)


def test_poincare_zero_and_first_mode(grid, first_mode):
    zero = solve_nse(VectorField.zeros(grid), SolverParams(nu_h=0.1, eps=0.01, dt=0.1, t_end=0.5))
    res = poincare_decay_check(zero, poincare_lambda0(grid))
    assert res.passed and res.margin == math.inf

    mode, _ = first_mode
    lam0 = poincare_lambda0(mode.grid)
    traj = solve_stokes_linear(mode, SolverParams(nu_h=0.1, eps=0.01, dt=1e-3, t_end=0.2, scheme="cn", advection=False))
    res = poincare_decay_check(traj, lam0)
    assert res.passed
    assert abs(res.margin) < 1e-3
    # an envelope decaying ten times faster is too strong
    assert not poincare_decay_check(traj, lam0 / 10).passed
    assert poincare_decay_check(traj, lam0 * 10).passed


def test_h02_zero_run_and_degenerate_calibration(grid, smooth_run):
    zero = solve_nse(VectorField.zeros(grid), SolverParams(nu_h=0.1, eps=0.01, dt=0.1, t_end=0.5))
    res = h02_propagation_check(zero, calibration=0.0)
    assert res.passed and res.detail["ratio"] == 0.0
    assert not h02_propagation_check(smooth_run, calibration=0.0).passed
    ok = h02_propagation_check(smooth_run, calibration=1.0)
    assert np.isfinite(ok.detail["ratio"]) and ok.detail["ratio"] > 0


def test_cauchy_gap_identical_is_zero(smooth_run):
    assert cauchy_gap(smooth_run, smooth_run) == (0.0, 0.0)


def test_cauchy_gap_requires_aligned_times(u0, smooth_run):
    other = solve_nse(u0 * 0.5, SolverParams(nu_h=0.1, eps=0.01, dt=0.02, t_end=0.2))
    with pytest.raises(ValueError):
        cauchy_gap(smooth_run, other)


def test_ledger_integrals_monotone(smooth_run):
    led = smooth_run.ledger
    for name in ("int_gradh_sq", "int_gradh_d3_sq", "int_gradh_d33_sq", "int_d3_sq"):
        assert np.all(np.diff(led[name]) >= 0)
    for name in ("L2_sq", "d3_sq", "d33_sq", "gradh_sq", "gradh_d3_sq", "gradh_d33_sq"):
        assert np.all(np.isfinite(led[name])) and np.all(led[name] >= 0)


@pytest.mark.oracle
def test_ledger_trapezoid_order(grid, u0):
    # u(t) = exp(-t) u0: int_0^1 ||grad_h u||^2 = ||grad_h u0||^2 (1 - e^-2) / 2
    errors = []
    for n in (10, 20, 40):
        led = EnergyLedger()
        for i in range(n + 1):
            t = i / n
            led.append_state(t, u0 * math.exp(-t))
        exact = led["gradh_sq"][0] * (1 - math.exp(-2)) / 2
        errors.append(abs(led["int_gradh_sq"][-1] - exact))
    assert oracles.richardson_order(errors[0], errors[1], errors[2]) >= 2 - 1e-3
    assert oracles.richardson_order(errors[1], errors[2], None) >= 2 - 1e-3


@pytest.mark.oracle
def test_ledger_integral_order_on_eigenmode_run(first_mode):
    # Crank-Nicolson from an eigenfield: time integral of ||grad_h u||^2 converges at second order
    mode, lam = first_mode
    nu, T = 0.5, 0.2
    e0 = l2_sq(mode)
    exact = lam * e0 * (1 - math.exp(-2 * nu * lam * T)) / (2 * nu * lam)
    errors = []
    for dt in (0.02, 0.01, 0.005):
        params = SolverParams(nu_h=nu, eps=0.01, dt=dt, t_end=T, scheme="cn", advection=False)
        errors.append(abs(solve_stokes_linear(mode, params).ledger["int_gradh_sq"][-1] - exact))
    assert oracles.richardson_order(*errors) >= 1.9
    assert oracles.richardson_order(errors[1], errors[2], None) >= 1.9


def test_ledger_rejects_nonincreasing_time(u0):
    led = EnergyLedger()
    led.append_state(0.0, u0)
    with pytest.raises(ValueError):
        led.append_state(0.0, u0)


def test_thm2_threshold_large_data_is_false_not_overflow(u0):
    consts = EmpiricalConstants.fixed(C2=1.0)
    res, b0 = threshold_thm2(u0 * 1e3, 0.01, consts)
    assert not res.passed and math.isnan(b0)
