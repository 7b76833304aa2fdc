"""Energy-ledger checks, empirical constants and smallness thresholds."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from nsaniso import stencil
from nsaniso.fields import (
    ScalarField,
    VectorField,
    d3_sq,
    gradh_d3_sq,
    gradh_sq,
    inner,
    l2_sq,
    mixed_norm,
)
from nsaniso.grid import Grid

REMARK_FACTOR = 2.0


# check records --------------------------------------------------------------------


def inputs_hash(*items) -> str:
    """Short stable digest of numbers, strings, arrays and fields."""
    h = hashlib.sha256()

    def feed(x):
        if isinstance(x, VectorField):
            h.update(x.grid.signature.encode())
            for c in x.components:
                feed(c)
        elif isinstance(x, ScalarField):
            h.update(x.grid.signature.encode() + x.loc.encode())
            feed(x.values)
        elif isinstance(x, np.ndarray):
            h.update(np.ascontiguousarray(x, dtype="<f8").tobytes())
        elif isinstance(x, (list, tuple)):
            for y in x:
                feed(y)
        elif isinstance(x, dict):
            for k in sorted(x):
                feed(str(k))
                feed(x[k])
        else:
            h.update(repr(x).encode())

    for item in items:
        feed(item)
    return h.hexdigest()[:16]


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    inputs_hash: str = ""
    detail: dict = field(default_factory=dict)

    def row(self) -> list:
        return [self.name, self.inputs_hash, str(bool(self.passed)).lower(), repr(float(self.margin))]


# energy identity --------------------------------------------------------------------


def energy_balance_residual(traj, mode: str = "scheme", nu_h: float | None = None, eps: float | None = None) -> float:
    """Largest per-step residual of the discrete energy identity, relative to ``||u0||^2``.

    ``scheme`` uses the dissipation exactly as the time discretisation
    produces it (the identity then holds to the linear-solve tolerance);
    ``trapezoid`` uses trapezoid time integrals of the dissipation rates and
    carries an O(dt^2) quadrature error per step.
    """
    led = traj.ledger
    if len(led) < 2:
        return 0.0
    e = led["L2_sq"]
    if e[0] == 0.0:
        return float(np.max(np.abs(e)))
    if mode == "scheme":
        total = e + led["diss_scheme"] + led["num_diss"] + led["adv_work"]
    elif mode == "trapezoid":
        nu = traj.params.nu_h if nu_h is None else nu_h
        ep = traj.params.eps if eps is None else eps
        total = e + 2.0 * nu * led["int_gradh_sq"] + 2.0 * ep * led["int_d3_sq"] + led["adv_work"]
    else:
        raise ValueError(f"unknown residual mode {mode!r}")
    return float(np.max(np.abs(np.diff(total))) / e[0])


def energy_increase(traj) -> float:
    """Largest per-step growth ``||u^{n+1}|| - ||u^n||`` relative to ``||u^n||`` (negative is decay)."""
    norms = np.sqrt(traj.ledger["L2_sq"])
    if norms.size < 2:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(norms[:-1] > 0, np.diff(norms) / norms[:-1], np.diff(norms))
    return float(np.max(rel))


def advection_residual(traj) -> float:
    """Largest ``|(N(u,u), u)| / (max|u| ||u||^2 / h_min)`` over the run."""
    led = traj.ledger
    l2 = led["L2_sq"]
    res = np.abs(led["adv_residual"])
    h = traj.snapshots[0].grid.min_spacing
    umax = max(s.max_abs() for s in traj.snapshots) or 1.0
    scale = np.where(l2 > 0, umax * l2 / h, 1.0)
    return float(np.max(res / scale)) if res.size else 0.0


def poincare_decay_check(traj, lambda0: float, nu_h: float | None = None, slack: float = 0.05) -> CheckResult:
    """``||u(t)||^2 <= ||u0||^2 exp(-2 nu_h t / lambda0)`` with relative slack.

    The margin is ``min_{t>0} (1 - ||u(t)||^2 / envelope(t))``; the check passes
    when it is at least ``-slack``.
    """
    nu = traj.params.nu_h if nu_h is None else nu_h
    t = traj.ledger["t"]
    e = traj.ledger["L2_sq"]
    env = e[0] * np.exp(-2.0 * nu * t / lambda0)
    if e[0] == 0.0:
        return CheckResult("poincare_decay", True, math.inf, inputs_hash(e, lambda0, nu))
    # t = 0 has margin 0 by construction and is skipped when later rows exist
    later = slice(1, None) if len(t) > 1 else slice(None)
    margin = float(np.min(1.0 - e[later] / env[later]))
    return CheckResult("poincare_decay", margin >= -slack, margin, inputs_hash(e, lambda0, nu))


def h01_nonincrease(traj, rtol: float = 1e-6) -> CheckResult:
    h = traj.ledger["H01"]
    if h[0] == 0.0:
        return CheckResult("h01_nonincrease", bool(np.all(h == 0.0)), math.inf)
    ratio = float(h.max() / h[0])
    return CheckResult("h01_nonincrease", ratio <= 1.0 + rtol, 1.0 + rtol - ratio, inputs_hash(h))


# empirical constants ------------------------------------------------------------------


@dataclass
class EmpiricalConstants:
    C0_est: float
    C1_est: float
    C2_est: float
    lambda0: float
    n_samples: int
    grid_signature: str
    C0_ratio1: float = 0.0
    C0_ratio2: float = 0.0
    C0_argmax: int = -1
    C1_argmax: int = -1
    C2_argmax: int = -1
    skipped: int = 0

    @property
    def C3_est(self) -> float:
        return c3_from_c2(self.C2_est)

    @property
    def C0_at_least_one(self) -> bool:
        return self.C0_est >= 1.0

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["C3_est"] = self.C3_est
        return d

    @classmethod
    def fixed(cls, C0=1.0, C1=1.0, C2=1.0, lambda0=1.0) -> "EmpiricalConstants":
        """Hand-set constants (for threshold arithmetic and tests)."""
        return cls(C0, C1, C2, lambda0, 0, "fixed")


def c3_from_c2(c2: float) -> float:
    return max(c2**2 / 2.0, 27.0 * c2**4 / 32.0)


def random_wall_scalar(grid: Grid, rng: np.random.Generator, max_mode: int = 4) -> ScalarField:
    """Smooth cell-centred scalar vanishing on the lateral walls, random low modes."""
    x, y, z = grid.mesh("center")
    g = np.zeros(x.shape)
    nterms = rng.integers(1, 6)
    for _ in range(nterms):
        k, l = rng.integers(1, max_mode + 1, size=2)
        m = rng.integers(0, max_mode + 1)
        amp = rng.standard_normal() / (1.0 + k + l + m)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        g += amp * np.sin(k * np.pi * x / grid.lx) * np.sin(l * np.pi * y / grid.ly) * np.cos(
            m * np.pi * z + phase
        )
    return ScalarField(grid, "center", g)


def anisotropic_ratios(g: ScalarField) -> tuple[float, float]:
    """``(ratio1, ratio2)`` of the two anisotropic inequalities; ``nan`` when degenerate."""
    l2 = np.sqrt(l2_sq(g))
    gh = np.sqrt(gradh_sq(g))
    dz = np.sqrt(d3_sq(g))
    den1 = np.sqrt(l2 * gh)
    den2 = np.sqrt(l2 * dz) + l2
    tiny = 1e-14 * max(l2, 1e-300)
    r1 = mixed_norm(g, 2.0, 4.0) / den1 if den1 > tiny else np.nan
    r2 = mixed_norm(g, np.inf, 2.0) / den2 if den2 > tiny else np.nan
    return float(r1), float(r2)


def _h01_of_gradh(u: VectorField) -> float:
    return math.sqrt(gradh_sq(u) + gradh_d3_sq(u))


def trilinear_ratio(u: VectorField, v: VectorField) -> float:
    """``|(u grad v, v)_H01|`` over the right-hand side of the trilinear estimate."""
    from nsaniso.operators import advect

    lhs = abs(inner(advect(u, v), v, "H01"))
    un = math.sqrt(l2_sq(u) + d3_sq(u))
    vn = math.sqrt(l2_sq(v) + d3_sq(v))
    gu, gv = _h01_of_gradh(u), _h01_of_gradh(v)
    rhs = math.sqrt(un * gu * vn) * gv**1.5 + gu * vn * gv
    return lhs / rhs if rhs > 0 else np.nan


def vertical_energy_ratio(u: VectorField) -> float:
    """``2|(d3(u grad u), d3 u)|`` over the right-hand side of the vertical-derivative estimate."""
    from nsaniso.operators import advect

    n = advect(u, u)
    lhs = 2.0 * abs(inner(n, u, "H01") - inner(n, u, "L2"))
    gh = math.sqrt(gradh_sq(u))
    d3 = math.sqrt(d3_sq(u))
    ghd3 = math.sqrt(gradh_d3_sq(u))
    rhs = math.sqrt(gh) * d3 * ghd3**1.5 + gh * d3 * ghd3
    return lhs / rhs if rhs > 0 else np.nan


def _c0_samples(grid: Grid, n_samples: int, seed: int):
    rng = np.random.default_rng(seed)
    for i in range(n_samples):
        yield i, random_wall_scalar(grid, rng)


def estimate_C0(grid: Grid, n_samples: int = 1000, seed: int = 0) -> dict:
    if n_samples < 100:
        raise ValueError("at least 100 samples are required")
    r1s, r2s = [], []
    for _, g in _c0_samples(grid, n_samples, seed):
        r1, r2 = anisotropic_ratios(g)
        r1s.append(r1)
        r2s.append(r2)
    r1s, r2s = np.asarray(r1s), np.asarray(r2s)
    if np.all(np.isnan(r1s)) and np.all(np.isnan(r2s)):
        raise ValueError("every sample was degenerate")
    i1, i2 = int(np.nanargmax(r1s)), int(np.nanargmax(r2s))
    best = max(r1s[i1], r2s[i2])
    return {
        "C0_est": float(best),
        "ratio1": r1s,
        "ratio2": r2s,
        "ratio1_max": float(r1s[i1]),
        "ratio2_max": float(r2s[i2]),
        "argmax": i1 if r1s[i1] >= r2s[i2] else i2,
        "skipped": int(np.sum(np.isnan(r1s)) + np.sum(np.isnan(r2s))),
    }


def estimate_constants(
    grid: Grid,
    n_samples: int = 1000,
    seed: int = 0,
    n_pairs: int | None = None,
    pair_grid: Grid | None = None,
) -> EmpiricalConstants:
    """Empirical constants of the anisotropic, trilinear and vertical-energy inequalities.

    ``C0`` uses ``n_samples`` random wall-vanishing scalars on ``grid``; ``C1``
    and ``C2`` use ``n_pairs`` random solenoidal fields on ``pair_grid``
    (defaults: ``n_samples // 10`` pairs on ``grid``).
    """
    from nsaniso.eigen import poincare_lambda0
    from nsaniso.initial import smooth_modes

    c0 = estimate_C0(grid, n_samples, seed)
    pg = pair_grid or grid
    n_pairs = max(10, n_samples // 10) if n_pairs is None else n_pairs
    rng = np.random.default_rng(seed + 1)
    r_tri, r_vert = [], []
    for i in range(n_pairs):
        s1, s2 = (int(s) for s in rng.integers(0, 2**31 - 1, size=2))
        u = smooth_modes(pg, 1.0, s1, max_mode=int(rng.integers(1, 4)))
        # every other pair is diagonal, the case that drives the H01 energy estimate
        v = u if i % 2 else smooth_modes(pg, 1.0, s2, max_mode=int(rng.integers(1, 4)))
        r_tri.append(trilinear_ratio(u, v))
        r_vert.append(vertical_energy_ratio(u))
    r_tri, r_vert = np.asarray(r_tri), np.asarray(r_vert)
    if np.all(np.isnan(r_tri)) or np.all(np.isnan(r_vert)):
        raise ValueError("every solenoidal sample was degenerate")
    i1, i2 = int(np.nanargmax(r_tri)), int(np.nanargmax(r_vert))
    return EmpiricalConstants(
        C0_est=c0["C0_est"],
        C1_est=float(r_tri[i1]),
        C2_est=float(r_vert[i2]),
        lambda0=poincare_lambda0(grid),
        n_samples=n_samples,
        grid_signature=grid.signature,
        C0_ratio1=c0["ratio1_max"],
        C0_ratio2=c0["ratio2_max"],
        C0_argmax=c0["argmax"],
        C1_argmax=i1,
        C2_argmax=i2,
        skipped=c0["skipped"] + int(np.sum(np.isnan(r_tri)) + np.sum(np.isnan(r_vert))),
    )


# smallness thresholds -----------------------------------------------------------------


def _norms0(u0: VectorField) -> tuple[float, float]:
    return math.sqrt(l2_sq(u0)), math.sqrt(d3_sq(u0))


def threshold_thm1(u0: VectorField, nu_h: float, consts: EmpiricalConstants) -> CheckResult:
    """``||u0||_H01 <= nu_h / (32 C1)``; margin is the bound minus the norm."""
    l2, d3 = _norms0(u0)
    h01 = math.sqrt(l2 * l2 + d3 * d3)
    bound = nu_h / (32.0 * consts.C1_est)
    return CheckResult("threshold_thm1", h01 <= bound, bound - h01, inputs_hash(u0, nu_h, consts.C1_est))


def thm2_bound(l2: float, d3: float, nu_h: float, c3: float) -> float:
    """Uniform bound on ``||d3 u(t)||^2`` under the second smallness condition (``nan`` if it fails)."""
    if d3 == 0.0:
        return 0.0
    exponent = c3 * l2 * l2 / nu_h**2
    if exponent > 700.0:
        return math.nan
    growth = math.exp(exponent)
    denom = d3**-2 - c3 / nu_h**4 * l2 * l2 * growth
    return growth / denom if denom > 0 else math.nan


def threshold_thm2(u0: VectorField, nu_h: float, consts: EmpiricalConstants) -> tuple[CheckResult, float]:
    """``||d3 u0||^1/2 ||u0||^1/2 exp(C3 ||u0||^2 / 4 nu^2) < C3^-1/4 nu``; returns the bound ``B0``."""
    l2, d3 = _norms0(u0)
    c3 = consts.C3_est
    exponent = c3 * l2 * l2 / (4.0 * nu_h**2)
    lhs = math.sqrt(d3 * l2) * math.exp(exponent) if exponent < 700.0 else math.inf
    rhs = c3**-0.25 * nu_h
    ok = lhs < rhs
    b0 = thm2_bound(l2, d3, nu_h, c3) if ok else math.nan
    res = CheckResult("threshold_thm2", ok, rhs - lhs, inputs_hash(u0, nu_h, c3), {"B0": b0})
    return res, b0


def remark_quantity(l2: float, d3: float, nu_h: float, c3: float) -> float:
    return c3 * l2 * l2 * (0.5 * nu_h + d3 * d3 / nu_h)


def threshold_remark(u0: VectorField, nu_h: float, consts: EmpiricalConstants) -> CheckResult:
    """``C3 ||u0||^2 (nu/2 + ||d3 u0||^2 / nu) <= nu^2``."""
    l2, d3 = _norms0(u0)
    q = remark_quantity(l2, d3, nu_h, consts.C3_est)
    return CheckResult("threshold_remark", q <= nu_h**2, nu_h**2 - q, inputs_hash(u0, nu_h, consts.C3_est))


def thm2_run_check(traj, b0: float, slack: float = 0.05) -> CheckResult:
    d3 = traj.ledger["d3_sq"]
    top = float(d3.max())
    if b0 == 0.0:
        return CheckResult("thm2_bound", top == 0.0, -top)
    return CheckResult("thm2_bound", top <= b0 * (1 + slack), 1.0 - top / b0, inputs_hash(d3, b0))


def remark_run_check(traj, nu_h: float | None = None, slack: float = 0.05) -> CheckResult:
    """``nu/2 + ||d3 u(t)||^2/nu <= 2 (nu/2 + ||d3 u0||^2/nu)`` at every ledger time."""
    nu = traj.params.nu_h if nu_h is None else nu_h
    y = 0.5 * nu + traj.ledger["d3_sq"] / nu
    bound = REMARK_FACTOR * y[0]
    ratio = float(y.max() / bound)
    return CheckResult("remark_bound", ratio <= 1.0 + slack, 1.0 - ratio, inputs_hash(y))


# second vertical derivative ------------------------------------------------------------


def h02_propagation_check(traj, nu_h: float | None = None, calibration: float = 1.0) -> CheckResult:
    """Ledger evaluation of the propagation bound for ``d3^2 u``.

    LHS(t) = ``||d3^2 u(t)||^2 + nu int_0^t ||grad_h d3^2 u||^2``;
    RHS = ``exp(C/nu I) (||d3^2 u0||^2 + C/nu sup_s(||d3 u||^2 + nu ||d3 u||) I)``
    with ``I = int_0^T ||grad_h u||_H01^2``.  The ratio ``max LHS / RHS`` is
    reported.  A nonpositive calibration constant is degenerate and fails on
    any nonzero run.
    """
    nu = traj.params.nu_h if nu_h is None else nu_h
    led = traj.ledger
    lhs = led["d33_sq"] + nu * led["int_gradh_d33_sq"]
    I = led["int_gradh_sq"][-1] + led["int_gradh_d3_sq"][-1]
    d3 = led["d3_sq"]
    sup_term = float(np.max(d3 + nu * np.sqrt(d3)))
    C = calibration
    rhs = math.exp(C / nu * I) * (led["d33_sq"][0] + C / nu * sup_term * I)
    top = float(lhs.max())
    h = inputs_hash(lhs, I, C)
    if top == 0.0 and rhs == 0.0:
        return CheckResult("h02_propagation", True, 0.0, h, {"ratio": 0.0})
    ratio = top / rhs if rhs > 0 else math.inf
    ok = C > 0 and ratio <= 1.0
    return CheckResult("h02_propagation", ok, ratio, h, {"ratio": ratio})


# epsilon sweep ----------------------------------------------------------------------------


def _trapezoid(y: np.ndarray, t: np.ndarray) -> float:
    return float(np.trapezoid(y, t)) if len(t) > 1 else 0.0


def cauchy_gap(traj_m, traj_k) -> tuple[float, float]:
    """``(sup_t ||u_m - u_k||_L2, int ||grad_h (u_m - u_k)||^2)`` over common snapshots."""
    tm = np.asarray(traj_m.snapshot_times)
    tk = np.asarray(traj_k.snapshot_times)
    if tm.shape != tk.shape or not np.allclose(tm, tk, rtol=0, atol=1e-12):
        raise ValueError("trajectories do not share snapshot times")
    if traj_m.snapshots[0].grid != traj_k.snapshots[0].grid:
        raise ValueError("trajectories live on different grids")
    sup = 0.0
    rates = []
    for a, b in zip(traj_m.snapshots, traj_k.snapshots):
        w = a - b
        sup = max(sup, math.sqrt(l2_sq(w)))
        rates.append(gradh_sq(w))
    return sup, _trapezoid(np.asarray(rates), tm)


def cauchy_rhs(traj_m, eps_m: float, eps_k: float, nu_h: float, c0: float = 1.0, c1: float = 1.0,
               initial_gap_sq: float = 0.0) -> float:
    """Right-hand side of the Gronwall bound on ``||u_m - u_k||^2`` from the ``u_m`` ledger."""
    led = traj_m.ledger
    t = led["t"]
    growth = led["int_gradh_sq"][-1] + led["int_gradh_d3_sq"][-1] + led["int_d3_sq"][-1]
    int_d3_norm = _trapezoid(np.sqrt(led["d3_sq"]), t)
    base = abs(eps_k - eps_m) * led["int_d3_sq"][-1] + initial_gap_sq
    return base * math.exp(c0 / nu_h * growth) * math.exp(
        c1 / nu_h ** (1 / 3) * led["int_gradh_d3_sq"][-1] ** (1 / 3) * int_d3_norm ** (2 / 3)
    )


def cauchy_lhs(traj_m, traj_k, eps_m: float, eps_k: float, nu_h: float) -> float:
    """``sup_t`` of ``||w||^2 + nu int ||grad_h w||^2 + (eps_m + eps_k) int ||d3 w||^2``."""
    t = np.asarray(traj_m.snapshot_times)
    e, g, d = [], [], []
    for a, b in zip(traj_m.snapshots, traj_k.snapshots):
        w = a - b
        e.append(l2_sq(w))
        g.append(gradh_sq(w))
        d.append(d3_sq(w))
    e, g, d = (np.asarray(v) for v in (e, g, d))
    best = 0.0
    for i in range(len(t)):
        val = e[i] + nu_h * _trapezoid(g[: i + 1], t[: i + 1]) + (eps_m + eps_k) * _trapezoid(d[: i + 1], t[: i + 1])
        best = max(best, val)
    return best


def fit_order(eps: np.ndarray, gaps: np.ndarray) -> float:
    """Least-squares slope of ``log gap`` against ``log eps``."""
    eps, gaps = np.asarray(eps, float), np.asarray(gaps, float)
    ok = (eps > 0) & (gaps > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(eps[ok]), np.log(gaps[ok]), 1)[0])


# local existence integrands -----------------------------------------------------------------


def gronwall_integrands(ledger, nu_h: float, c0: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row Gronwall integrands ``B1(s), B2(s)`` of the perturbation estimate."""
    v2 = ledger["L2_sq"]
    v = np.sqrt(v2)
    d3sq = ledger["d3_sq"]
    d3 = np.sqrt(d3sq)
    gh = ledger["gradh_sq"]
    ghd3 = ledger["gradh_d3_sq"]
    c4, c6 = c0**4, c0**6
    b1 = 2.0 * (
        c4 / nu_h * (3 * c0**2 + 2) * ghd3
        + c4 / (2 * nu_h) * (18 * c0**2 + 1) * gh
        + 2 * c6 / nu_h * d3sq
        + c4 * d3
    )
    b2 = 2.0 * c4 * (v2 * d3 + v * d3sq + 2.0 * v * gh)
    return b1, b2


def gronwall_z_bound(ledger, nu_h: float, c0: float) -> float:
    """``2 int B2 exp(2 int B1)`` over the ledger horizon."""
    b1, b2 = gronwall_integrands(ledger, nu_h, c0)
    t = ledger["t"]
    return 2.0 * _trapezoid(b2, t) * math.exp(2.0 * _trapezoid(b1, t))


def divergence_report(u: VectorField) -> float:
    """``max |div u|`` scaled by ``||u|| / h_min`` (0 for the zero field)."""
    from nsaniso.operators import divergence_scale, max_divergence

    scale = divergence_scale(u)
    return max_divergence(u) / scale if scale > 0 else 0.0


def level_weights(grid: Grid, loc: str):
    return stencil.h_weights(grid, loc)
