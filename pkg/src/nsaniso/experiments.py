"""The batch experiments behind the command line.

Every ``run_*`` function takes an :class:`ExperimentConfig` and returns a
:class:`Report`; nothing is written here.  Sweep members run in worker
processes when ``jobs > 1``; results are reduced in input order so the
output does not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from nsaniso import diagnostics as dg
from nsaniso.config import ExperimentConfig, parse_list
from nsaniso.eigen import h1_sq, poincare_lambda0, project_Pk, stokes_eigenbasis
from nsaniso.fields import VectorField, d3_sq, l2_sq, norm
from nsaniso.grid import Grid
from nsaniso.initial import make_initial
from nsaniso.io import Report, Table
from nsaniso.solver import SolverParams, solve_nse, solve_perturbation, solve_stokes_linear
from nsaniso.symmetry import (
    density_approximation,
    diagonal_sequence,
    s_invariance_defect,
    sigma_extend,
)

log = logging.getLogger(__name__)

PARAM_KEYS = ("nu_h", "eps", "dt", "t_end", "cfl_cap", "blowup_threshold", "scheme", "advection")


# helpers ------------------------------------------------------------------------------


def solver_params(cfg: ExperimentConfig, **override) -> SolverParams:
    kw = {k: cfg.params[k] for k in PARAM_KEYS if k in cfg.params}
    kw.setdefault("nu_h", 0.1)
    kw.setdefault("eps", 0.01)
    kw.setdefault("dt", 0.01)
    kw.setdefault("t_end", 1.0)
    kw["stride"] = cfg.stride
    kw.update(override)
    for k in ("nu_h", "eps", "dt", "t_end", "cfl_cap", "blowup_threshold"):
        if k in kw:
            kw[k] = float(kw[k])
    return SolverParams(**kw)


def initial_field(cfg: ExperimentConfig, grid: Grid | None = None, **override) -> VectorField:
    options = {**cfg.initial, **override}
    family = options.pop("family", "modes")
    amplitude = float(options.pop("amplitude", 1.0))
    seed = int(options.pop("seed", cfg.seed))
    return make_initial(grid or cfg.grid, family, amplitude, seed, **options)


def full_field(u: VectorField) -> VectorField:
    return sigma_extend(u) if u.grid.half_domain else u


def full_grid(cfg: ExperimentConfig) -> Grid:
    return cfg.grid.doubled() if cfg.grid.half_domain else cfg.grid


def parallel_map(fn, items, jobs: int = 1) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def constants_for(cfg: ExperimentConfig, grid: Grid) -> dg.EmpiricalConstants:
    """Configured constants if all of C0, C1, C2 are given, else estimated on ``grid``."""
    c = {k.upper(): v for k, v in cfg.constants.items()}
    if all(k in c for k in ("C0", "C1", "C2")):
        return dg.EmpiricalConstants.fixed(float(c["C0"]), float(c["C1"]), float(c["C2"]), poincare_lambda0(grid))
    n = int(cfg.sweep.get("n_samples", 200))
    pairs = cfg.sweep.get("n_pairs")
    return dg.estimate_constants(grid, n, cfg.seed, None if pairs is None else int(pairs))


def _check(name, passed, margin, *inputs, **detail) -> dg.CheckResult:
    return dg.CheckResult(name, bool(passed), float(margin), dg.inputs_hash(name, *inputs), detail)


def boundary_defects(u: VectorField) -> tuple[float, float]:
    """``(max |u3|, max |d3 u_h|)`` on the planes ``x3 = 0`` and ``x3 = 1`` of a full-domain field."""
    g = u.grid
    nzh = g.nz // 2
    faces = (0, nzh)
    u3 = max(float(np.max(np.abs(u.u3[:, :, k]))) for k in faces)
    dh = 0.0
    for a in (u.u1, u.u2):
        for k in faces:
            dh = max(dh, float(np.max(np.abs(a[:, :, k] - a[:, :, k - 1]))) / g.dz)
    return u3, dh


# simulate -----------------------------------------------------------------------------


def run_simulate(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    u0_in = initial_field(cfg)
    params = solver_params(cfg)
    traj = solve_nse(u0_in, params)
    rep = Report("simulate")
    rep.ledgers["ledger"] = traj.ledger
    for i, (t, s) in enumerate(zip(traj.snapshot_times, traj.snapshots)):
        rep.snapshots[f"snapshot_{i:05d}"] = s
    grid = traj.snapshots[0].grid
    lambda0 = poincare_lambda0(grid)
    rep.constants = {"lambda0": lambda0}
    u0 = traj.snapshots[0]
    rep.checks.append(_check("run_completed", traj.completed, traj.last_stable_time, traj.status))
    res = dg.energy_balance_residual(traj)
    rep.checks.append(_check("energy_balance", res <= cfg.tol("energy_rtol"), cfg.tol("energy_rtol") - res, res))
    growth = dg.energy_increase(traj)
    rep.checks.append(_check("energy_nonincrease", growth <= cfg.tol("energy_growth"), cfg.tol("energy_growth") - growth, growth))
    skew = dg.advection_residual(traj)
    rep.checks.append(_check("advection_skew", skew <= cfg.tol("skew_rtol"), cfg.tol("skew_rtol") - skew, skew))
    pc = dg.poincare_decay_check(traj, lambda0, slack=cfg.tol("poincare_slack"))
    rep.checks.append(pc)
    symmetric = s_invariance_defect(u0) <= cfg.tol("symmetry_rtol") * max(norm(u0), 1e-300)
    if symmetric:
        worst = max(s_invariance_defect(s) / max(norm(s), 1e-300) for s in traj.snapshots)
        rep.checks.append(_check("s_invariance", worst <= cfg.tol("symmetry_rtol"), cfg.tol("symmetry_rtol") - worst, worst))
        b3, bh = map(max, zip(*(boundary_defects(s) for s in traj.snapshots)))
        worst_b = max(b3, bh)
        rep.checks.append(_check("top_bottom_conditions", worst_b <= cfg.tol("boundary_atol"), cfg.tol("boundary_atol") - worst_b, b3, bh))
    calib = float(cfg.sweep.get("calibration", 1.0))
    rep.checks.append(dg.h02_propagation_check(traj, calibration=calib))
    rep.summary = {
        "status": traj.status,
        "steps": len(traj.ledger) - 1,
        "energy_balance_residual": res,
        "energy_balance_residual_trapezoid": dg.energy_balance_residual(traj, "trapezoid"),
        "max_energy_growth": growth,
        "advection_residual": skew,
        "poincare_margin": pc.margin,
        "mean_cg_iterations": float(np.mean(traj.cg_iterations)) if traj.cg_iterations else 0.0,
        "s_invariant_data": bool(symmetric),
        "h02_ratio": rep.checks[-1].margin,
    }
    return rep


# epsilon sweep ----------------------------------------------------------------------------


def _eps_member(args):
    u0, params = args
    return solve_nse(u0, params)


def eps_list(cfg: ExperimentConfig) -> list[float]:
    eps = parse_list(cfg.sweep.get("eps_list", "1e-2 5e-3 2.5e-3"))
    if len(eps) < 3:
        raise ValueError("the epsilon sweep needs at least three values")
    if any(e < 0 for e in eps) or any(b > a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon values must be nonnegative and non-increasing")
    return eps


def run_eps_sweep(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    eps = eps_list(cfg)
    if cfg.sweep.get("include_zero", False) and eps[-1] > 0:
        eps = eps + [0.0]
    u0 = full_field(initial_field(cfg))
    base = solver_params(cfg)
    members = [(u0, SolverParams(**{**base.__dict__, "eps": e})) for e in eps]
    trajs = parallel_map(_eps_member, members, jobs)
    rep = Report("eps-sweep")
    nu = base.nu_h
    c0 = float(cfg.sweep.get("cauchy_c0", 1.0))
    c1 = float(cfg.sweep.get("cauchy_c1", 1.0))
    table = Table(("eps_m", "eps_k", "delta_eps", "sup_gap", "int_gradh_gap", "cauchy_lhs", "cauchy_rhs",
                   "cauchy_ratio", "completed", "limit_row"))
    for i, tr in enumerate(trajs):
        rep.ledgers[f"ledger_eps{i}"] = tr.ledger
    for i in range(len(eps) - 1):
        tm, tk = trajs[i], trajs[i + 1]
        ok = tm.completed and tk.completed
        if ok:
            sup, integ = dg.cauchy_gap(tm, tk)
            lhs = dg.cauchy_lhs(tm, tk, eps[i], eps[i + 1], nu)
            rhs = dg.cauchy_rhs(tm, eps[i], eps[i + 1], nu, c0, c1)
            ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        else:
            sup = integ = lhs = rhs = ratio = math.nan
        table.add(eps[i], eps[i + 1], eps[i] - eps[i + 1], sup, integ, lhs, rhs, ratio, ok, eps[i + 1] == 0.0)
    rep.tables["cauchy"] = table
    rows = [r for r in table.rows if r[8] and not r[9]]
    d_eps = np.array([r[2] for r in rows])
    gaps = np.array([r[3] for r in rows])
    order = dg.fit_order(d_eps, gaps)
    rep.checks.append(_check("runs_completed", all(t.completed for t in trajs), sum(t.completed for t in trajs)))
    decreasing = bool(np.all(np.diff(gaps) < 0)) if gaps.size > 1 else False
    rep.checks.append(_check("gaps_decreasing", decreasing, float(np.min(-np.diff(gaps))) if gaps.size > 1 else 0.0, gaps))
    lo, hi = cfg.tol("order_min"), cfg.tol("order_max")
    in_range = lo <= order <= hi if math.isfinite(order) else False
    rep.checks.append(_check("order_in_range", in_range, min(order - lo, hi - order) if in_range else -1.0, order))
    ratios = [r[7] for r in rows]
    worst = max(ratios) if ratios else math.nan
    rep.checks.append(_check("cauchy_bound", bool(ratios) and worst <= 1.0, 1.0 - worst, ratios))
    rep.summary = {"eps": eps, "order": order, "gaps": gaps.tolist(), "worst_cauchy_ratio": worst}
    return rep


# smallness sweep ---------------------------------------------------------------------------


def _smallness_member(args):
    label, family, amplitude, eta, u0, params, consts, tol = args
    thm1 = dg.threshold_thm1(u0, params.nu_h, consts)
    thm2, b0 = dg.threshold_thm2(u0, params.nu_h, consts)
    rem = dg.threshold_remark(u0, params.nu_h, consts)
    traj = solve_nse(u0, params)
    h01 = traj.ledger["H01"]
    h01_ratio = float(h01.max() / h01[0]) if h01[0] > 0 else 1.0
    d3 = traj.ledger["d3_sq"]
    d3_ratio = float(d3.max() / b0) if (thm2.passed and b0 > 0) else math.nan
    y = 0.5 * params.nu_h + d3 / params.nu_h
    remark_ratio = float(y.max() / (2.0 * y[0]))
    if traj.status == "blowup_detected":
        outcome = "blowup"
    elif not traj.completed:
        outcome = "failed"
    elif h01_ratio <= 1.0 + tol["h01_rtol"]:
        outcome = "bounded"
    else:
        outcome = "growth"
    imp1 = (not thm1.passed) or outcome == "bounded"
    imp2 = (not thm2.passed) or (traj.completed and (b0 == 0.0 and d3.max() == 0.0 or d3_ratio <= 1 + tol["bound_slack"]))
    imp3 = (not rem.passed) or (traj.completed and remark_ratio <= 1 + tol["bound_slack"])
    l2, dz = math.sqrt(l2_sq(u0)), math.sqrt(d3_sq(u0))
    return (label, family, amplitude, eta, l2, dz, math.hypot(l2, dz), thm1.passed, thm2.passed, b0, rem.passed,
            traj.status, h01_ratio, d3_ratio, remark_ratio, outcome, imp1 and imp2 and imp3, imp1, imp2, imp3)


SMALLNESS_HEADER = ("label", "family", "amplitude", "eta", "L2", "d3", "H01", "thm1", "thm2", "B0", "remark",
                    "status", "sup_H01_ratio", "sup_d3sq_over_B0", "remark_ratio", "outcome", "implication_ok",
                    "thm1_implication", "thm2_implication", "remark_implication")


def smallness_members(cfg: ExperimentConfig):
    """``(label, family, amplitude, eta, u0)`` for every sweep member."""
    grid = cfg.grid
    family = cfg.initial.get("family", "modes")
    members = []
    if family != "anisotropic":
        for a in parse_list(cfg.sweep.get("amplitudes", "0 0.01 0.1")):
            members.append((f"{family}_a{a:g}", family, a, math.nan, full_field(initial_field(cfg, amplitude=a))))
    etas = parse_list(cfg.sweep.get("etas", "")) if cfg.sweep.get("etas", "") != "" else []
    if etas:
        alpha = float(cfg.sweep.get("alpha", 0.25))
        amp = float(cfg.sweep.get("aniso_amplitude", cfg.initial.get("amplitude", 1.0)))
        for eta in etas:
            u = initial_field(cfg, family="anisotropic", amplitude=amp, eta=eta, alpha=alpha)
            members.append((f"anisotropic_eta{eta:g}", "anisotropic", amp, eta, full_field(u)))
    return members


def run_smallness_sweep(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    params = solver_params(cfg)
    consts = constants_for(cfg, full_grid(cfg))
    members = smallness_members(cfg)
    args = [(lab, fam, a, eta, u0, params, consts, cfg.tolerances) for lab, fam, a, eta, u0 in members]
    rows = parallel_map(_smallness_member, args, jobs)
    table = Table(SMALLNESS_HEADER)
    for r in rows:
        table.add(*r)
    rep = Report("smallness-sweep", tables={"classification": table}, constants=consts.as_dict())
    for name, col in (("thm1_implies_bounded", 17), ("thm2_implies_bound", 18), ("remark_implies_bound", 19)):
        bad = [r[0] for r in rows if not r[col]]
        rep.checks.append(_check(name, not bad, -len(bad), [r[col] for r in rows], failing=bad))
    rep.summary = {
        "members": len(rows),
        "thm1_true": sum(bool(r[7]) for r in rows),
        "thm2_true": sum(bool(r[8]) for r in rows),
        "remark_true": sum(bool(r[10]) for r in rows),
        "bounded": sum(r[15] == "bounded" for r in rows),
    }
    return rep


# local existence ----------------------------------------------------------------------------


def select_k0(v0: VectorField, basis, threshold: float) -> tuple[int | None, list[float]]:
    """Smallest ``k >= 1`` with ``||(I - P_k) v0||^2 <= threshold`` and the tail energies."""
    tails = []
    k0 = None
    for k in range(1, len(basis)):
        tail = l2_sq(project_Pk(v0, basis, "complement", k))
        tails.append(tail)
        if k0 is None and tail <= threshold:
            k0 = k
    return k0, tails


def eigenfield_data(basis, options: dict, seed: int = 0) -> VectorField:
    """Initial data in the span of leading eigenfields.

    ``index = i`` selects the ``i``-th eigenfield alone; ``modes = n`` draws a
    seeded random combination of the first ``n``.  Scaled to ``||v0|| = amplitude``.
    """
    amplitude = float(options.get("amplitude", 1.0))
    if "index" in options:
        v = basis.fields[int(options["index"]) - 1]
    else:
        n = int(options.get("modes", 1))
        if not 1 <= n < len(basis):
            raise ValueError(f"modes={n} needs a deeper eigenbasis (have {len(basis)})")
        coef = np.random.default_rng(int(options.get("seed", seed))).standard_normal(n)
        v = VectorField.zeros(basis.grid)
        for c, f in zip(coef, basis.fields[:n]):
            v = v + c * f
    return v * (amplitude / math.sqrt(l2_sq(v)))


def local_time(delta0: float, lam_next: float, energy: float, nu_h: float) -> float:
    """Largest admissible existence time of the splitting construction."""
    return delta0 / (4.0 * lam_next) / (2.0 * energy + delta0 * nu_h / 8.0)


def _integral(traj, column="int_gradh_sq") -> float:
    return float(traj.ledger[column][-1])


def run_local_existence(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    sw = cfg.sweep
    base = solver_params(cfg)
    nu = base.nu_h
    delta = float(sw.get("delta", 1.0))
    delta0 = float(sw.get("delta0", delta))
    if not 0 < delta0 <= delta:
        raise ValueError("need 0 < delta0 <= delta")
    k_max = int(sw.get("k_max", 32))
    weight = float(sw.get("vertical_weight", 1.0))
    grid = full_grid(cfg)
    basis = stokes_eigenbasis(grid, k_max, vertical_weight=weight, seed=cfg.seed)
    if cfg.initial.get("family") == "stokes_mode":
        v0 = eigenfield_data(basis, cfg.initial, cfg.seed)
    else:
        v0 = full_field(initial_field(cfg))
    energy = l2_sq(v0)
    threshold = delta0 * nu / 16.0
    k0, tails = select_k0(v0, basis, threshold)
    rep = Report("local-existence")
    tail_table = Table(("k", "tail_L2_sq", "threshold", "lambda_k"))
    for k, tail in enumerate(tails, start=1):
        tail_table.add(k, tail, threshold, basis.eigenvalues[k - 1])
    rep.tables["k0_selection"] = tail_table
    rep.constants = {"lambda0": basis.lambda0, "eigenvalues": basis.eigenvalues.tolist(), "vertical_weight": weight}
    if k0 is None:
        achievable = 16.0 * tails[-1] / nu
        rep.checks.append(_check("basis_depth", False, threshold - tails[-1], tails[-1], achievable_delta0=achievable))
        rep.summary = {"k0": None, "achievable_delta0": achievable, "delta0": delta0}
        return rep
    lam_next = float(basis.eigenvalues[k0])
    t0 = local_time(delta0, lam_next, energy, nu)
    n_steps = int(sw.get("n_steps", 50))
    params = SolverParams(**{**base.__dict__, "dt": t0 / n_steps, "t_end": t0, "stride": 1})
    v1_0 = project_Pk(v0, basis, "inside", k0)
    v2_0 = v0 - v1_0
    tr_v1 = solve_stokes_linear(v1_0, params)
    tr_v2 = solve_stokes_linear(v2_0, params)
    tr_v = solve_stokes_linear(v0, params)
    tr_z = solve_perturbation(tr_v, params)
    tr_u = solve_nse(v0, params)
    i1, i2 = _integral(tr_v1), _integral(tr_v2)
    iz, iu = _integral(tr_z), _integral(tr_u)
    slack = 1.0 + cfg.tol("local_slack")
    c0 = float(cfg.constants.get("C0", cfg.constants.get("c0", sw.get("C0", 1.0))))
    b1, b2 = dg.gronwall_integrands(tr_v.ledger, nu, c0)
    bt = Table(("t", "B1", "B2", "int_gradh_sq_v", "int_gradh_sq_z", "z_L2_sq"))
    for t, a, b, gv, gz, zz in zip(tr_v.ledger["t"], b1, b2, tr_v.ledger["int_gradh_sq"],
                                   tr_z.ledger["int_gradh_sq"], tr_z.ledger["L2_sq"]):
        bt.add(t, a, b, gv, gz, zz)
    rep.tables["gronwall"] = bt
    rep.ledgers.update({"ledger_v1": tr_v1.ledger, "ledger_v2": tr_v2.ledger, "ledger_z": tr_z.ledger,
                        "ledger_u": tr_u.ledger})
    split_gap = max(norm(a + b - c) for a, b, c in zip(tr_v.snapshots, tr_z.snapshots, tr_u.snapshots))
    rep.checks.append(_check("basis_depth", True, threshold - tails[k0 - 1], k0))
    rep.checks.append(_check("runs_completed", all(t.completed for t in (tr_v1, tr_v2, tr_z, tr_u)), t0))
    rep.checks.append(_check("v1_integral", i1 <= delta0 / 4 * slack, delta0 / 4 - i1, i1))
    rep.checks.append(_check("v2_integral", i2 <= delta0 / 4 * slack, delta0 / 4 - i2, i2))
    rep.checks.append(_check("z_integral", iz <= delta / 2 * slack, delta / 2 - iz, iz))
    rep.checks.append(_check("u_integral", iu <= delta * slack, delta - iu, iu))
    rep.summary = {
        "k0": k0, "T0": t0, "delta": delta, "delta0": delta0, "lambda_k0_plus_1": lam_next,
        "energy": energy, "int_v1": i1, "int_v2": i2, "int_z": iz, "int_u": iu,
        "split_gap": split_gap, "gronwall_z_bound": dg.gronwall_z_bound(tr_v.ledger, nu, c0),
        "spectral_bound_ratio": h1_sq(v1_0) / (lam_next * energy) if energy > 0 else 0.0,
    }
    return rep


# density demo ---------------------------------------------------------------------------------


def run_density_demo(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    if not cfg.grid.half_domain:
        raise ValueError("the density demo works on the half domain")
    u = initial_field(cfg)
    count = int(cfg.sweep.get("lam_count", 12))
    lam0 = float(cfg.sweep.get("lam0", 1.5))
    lams, etas = diagonal_sequence(cfg.grid, count, lam0)
    steps = density_approximation(u, lams, etas)
    table = Table(("k", "lam", "eta", "error_H01", "error_ratio", "zero_band", "gamma_ok", "max_div"))
    e0 = steps[0].error if steps else 0.0
    for k, s in enumerate(steps):
        table.add(k, s.lam, s.eta, s.error, s.error / e0 if e0 > 0 else 0.0, s.zero_band, s.gamma_ok, s.max_div)
    rep = Report("density-demo", tables={"density": table})
    errs = np.array([s.error for s in steps])
    final_ratio = float(errs[-1] / errs[0]) if errs[0] > 0 else 0.0
    target = cfg.tol("density_ratio")
    rep.checks.append(_check("error_reduction", final_ratio <= target, target - final_ratio, errs))
    rep.checks.append(_check("approximants_valid", all(s.valid for s in steps), sum(s.valid for s in steps), errs))
    rep.summary = {"errors": errs.tolist(), "final_ratio": final_ratio,
                   "monotone": bool(np.all(np.diff(errs) <= 0)),
                   "observed_rates": np.diff(np.log(np.maximum(errs, 1e-300))).tolist()}
    return rep


# constants ----------------------------------------------------------------------------------------


def run_constants(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    n = int(cfg.sweep.get("n_samples", 1000))
    coarse = full_grid(cfg)
    fine = coarse.with_resolution(2 * coarse.nx, 2 * coarse.ny)
    pairs = cfg.sweep.get("n_pairs")
    consts = dg.estimate_constants(coarse, n, cfg.seed, None if pairs is None else int(pairs))
    c_fine = dg.estimate_C0(fine, n, cfg.seed)
    c_coarse = dg.estimate_C0(coarse, n, cfg.seed)
    samples = Table(("sample", "ratio1_coarse", "ratio2_coarse", "ratio1_fine", "ratio2_fine"))
    for i in range(n):
        samples.add(i, c_coarse["ratio1"][i], c_coarse["ratio2"][i], c_fine["ratio1"][i], c_fine["ratio2"][i])
    table = Table(("grid", "C0_est", "C0_ratio1", "C0_ratio2", "C1_est", "C2_est", "C3_est", "lambda0", "n_samples"))
    table.add(coarse.signature, consts.C0_est, consts.C0_ratio1, consts.C0_ratio2, consts.C1_est, consts.C2_est,
              consts.C3_est, consts.lambda0, n)
    table.add(fine.signature, c_fine["C0_est"], c_fine["ratio1_max"], c_fine["ratio2_max"], math.nan, math.nan,
              math.nan, poincare_lambda0(fine), n)
    rep = Report("constants", tables={"constants": table, "samples": samples}, constants=consts.as_dict())
    all_r = np.concatenate([c_coarse["ratio1"], c_coarse["ratio2"]])
    rep.checks.append(_check("ratios_below_C0", bool(np.nanmax(all_r) <= consts.C0_est),
                             consts.C0_est - np.nanmax(all_r), all_r))
    change = abs(c_fine["C0_est"] - consts.C0_est) / consts.C0_est
    rtol = cfg.tol("constants_rtol")
    rep.checks.append(_check("C0_refinement_stable", change < rtol, rtol - change, change))
    positive = min(consts.C0_est, consts.C1_est, consts.C2_est) > 0
    rep.checks.append(_check("constants_positive", positive, min(consts.C0_est, consts.C1_est, consts.C2_est)))
    rep.summary = {"C0_change": change, "C0_at_least_one": consts.C0_at_least_one}
    return rep


RUNNERS = {
    "simulate": run_simulate,
    "eps-sweep": run_eps_sweep,
    "smallness-sweep": run_smallness_sweep,
    "local-existence": run_local_existence,
    "density-demo": run_density_demo,
    "constants": run_constants,
}


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    return RUNNERS[cfg.name](cfg, jobs)

