"""Time integration of the anisotropic Navier-Stokes system and its linear splits.

Each step solves the discrete Stokes problem exactly (up to the CG
tolerance), with the advection term treated explicitly:

* ``euler`` -- IMEX Euler: implicit diffusion, explicit skew advection;
* ``cn``    -- Crank-Nicolson diffusion with Adams-Bashforth-2 advection.

All runs take place on the vertically periodic full domain; half-domain
data is extended symmetrically first.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from nsaniso import stencil
from nsaniso.fields import FieldError, VectorField, inner, norm
from nsaniso.ledger import EnergyLedger
from nsaniso.operators import SolverError, advect, is_solenoidal, max_divergence, stokes_solve
from nsaniso.symmetry import sigma_extend

log = logging.getLogger(__name__)

SCHEMES = ("euler", "cn")
COMPLETED = "completed"
BLOWUP = "blowup_detected"
FAILURE = "solver_failure"


class CFLError(ValueError):
    def __init__(self, cfl: float, suggested_dt: float):
        super().__init__(f"advective CFL {cfl:.3g} exceeds the cap; try dt <= {suggested_dt:.3e}")
        self.cfl = cfl
        self.suggested_dt = suggested_dt


@dataclass(frozen=True)
class SolverParams:
    nu_h: float
    eps: float
    dt: float
    t_end: float
    cfl_cap: float = 0.5
    blowup_threshold: float = 1e3
    scheme: str = "euler"
    advection: bool = True
    stride: int = 1
    cg_rtol: float = 1e-12

    def __post_init__(self):
        if not self.nu_h > 0:
            raise ValueError("nu_h must be positive")
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= self.dt * (1 - 1e-12):
            raise ValueError("t_end must be at least one time step")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.stride < 1:
            raise ValueError("snapshot stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass
class Trajectory:
    params: SolverParams
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    status: str = COMPLETED
    last_stable_time: float = 0.0
    cg_iterations: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return self.ledger.column("t")

    @property
    def final(self) -> VectorField:
        return self.snapshots[-1]

    def snapshot_at(self, index: int) -> VectorField:
        return self.snapshots[index]

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED


def check_cfl(u: VectorField, params: SolverParams) -> float:
    umax = u.max_abs()
    cfl = params.dt * umax / u.grid.min_spacing
    if params.advection and cfl > params.cfl_cap:
        raise CFLError(cfl, params.cfl_cap * u.grid.min_spacing / umax)
    return cfl


def _linear_part(u: VectorField, params: SolverParams) -> VectorField:
    g = u.grid
    return VectorField(
        g,
        *(
            params.nu_h * stencil.lap_h(a, g, loc) + params.eps * stencil.d33(a, g, loc)
            for a, loc in u.items()
        ),
    ).enforce_walls()


def _dissipation(u: VectorField, params: SolverParams) -> float:
    from nsaniso.fields import d3_sq, gradh_sq

    return params.nu_h * gradh_sq(u) + params.eps * d3_sq(u)


@dataclass
class _StepResult:
    state: VectorField
    diss: float
    num: float
    adv: float
    iterations: int


def _advance(u: VectorField, forcing: VectorField | None, params: SolverParams) -> _StepResult:
    """One step of ``du/dt - L u + grad p = -forcing``, with the energy increments.

    ``forcing`` is the (already extrapolated) explicit advection term, or
    ``None`` for the linear problem.
    """
    dt = params.dt
    if params.scheme == "euler":
        rhs = u / dt
        if forcing is not None:
            rhs = rhs - forcing
        new, info = stokes_solve(rhs, 1.0 / dt, params.nu_h, params.eps, rtol=params.cg_rtol)
        diss = 2.0 * dt * _dissipation(new, params)
        jump = new - u
        num = inner(jump, jump)
        adv = 2.0 * dt * inner(forcing, new) if forcing is not None else 0.0
    else:
        rhs = u / dt + 0.5 * _linear_part(u, params)
        if forcing is not None:
            rhs = rhs - forcing
        new, info = stokes_solve(rhs, 1.0 / dt, 0.5 * params.nu_h, 0.5 * params.eps, rtol=params.cg_rtol)
        mid = new + u
        diss = 0.5 * dt * _dissipation(mid, params)
        num = 0.0
        adv = dt * inner(forcing, mid) if forcing is not None else 0.0
    return _StepResult(new, diss, num, adv, info.iterations)


def step_nse(u: VectorField, params: SolverParams, previous_advection: VectorField | None = None) -> VectorField:
    """Advance a solenoidal full-domain field by one time step.

    For the ``cn`` scheme ``previous_advection`` is the advection term of the
    previous step (Adams-Bashforth extrapolation); without it the step falls
    back to first-order extrapolation.
    """
    if u.grid.half_domain:
        raise FieldError("time stepping runs on the full domain; extend the data first")
    check_cfl(u, params)
    forcing = None
    if params.advection:
        forcing = advect(u, u)
        if params.scheme == "cn" and previous_advection is not None:
            forcing = 1.5 * forcing - 0.5 * previous_advection
    return _advance(u, forcing, params).state


def _prepare(u0: VectorField) -> VectorField:
    if u0.grid.half_domain:
        u0 = sigma_extend(u0)
    if not is_solenoidal(u0, 1e-9):
        raise FieldError(f"initial data is not solenoidal (max |div| {max_divergence(u0):.3e})")
    return u0.copy().enforce_walls()


def _integrate(u0: VectorField, params: SolverParams, forcing_fn) -> Trajectory:
    """Shared stepping loop.

    ``forcing_fn(n, u)`` returns the explicit advection term at step ``n``
    for state ``u`` (``None`` for linear runs).
    """
    traj = Trajectory(params)
    u = u0
    traj.ledger.append_state(0.0, u, div_max=max_divergence(u))
    traj.snapshot_times.append(0.0)
    traj.snapshots.append(u.copy())
    h1_0 = norm(u, "H1")
    previous = None
    n_steps = params.n_steps
    for n in range(n_steps):
        t_new = (n + 1) * params.dt
        try:
            if params.advection:
                check_cfl(u, params)
            forcing_now = forcing_fn(n, u)
            adv_residual = inner(forcing_now, u) if forcing_now is not None else 0.0
            forcing = forcing_now
            if forcing_now is not None and params.scheme == "cn" and previous is not None:
                forcing = 1.5 * forcing_now - 0.5 * previous
            res = _advance(u, forcing, params)
        except (SolverError, CFLError) as exc:
            log.warning("step %d failed: %s", n + 1, exc)
            traj.status = FAILURE
            break
        new = res.state
        if not new.is_finite() or (h1_0 > 0 and norm(new, "H1") > params.blowup_threshold * h1_0):
            traj.status = BLOWUP
            break
        previous = forcing_now
        u = new
        traj.cg_iterations.append(res.iterations)
        traj.ledger.append_state(
            t_new, u, adv_residual=adv_residual, div_max=max_divergence(u),
            diss=res.diss, num=res.num, adv=res.adv,
        )
        traj.last_stable_time = t_new
        if (n + 1) % params.stride == 0 or n + 1 == n_steps:
            traj.snapshot_times.append(t_new)
            traj.snapshots.append(u.copy())
    return traj


def solve_nse(u0: VectorField, params: SolverParams) -> Trajectory:
    """Integrate the regularised system from ``u0`` (half-domain data is extended first)."""
    u0 = _prepare(u0)
    if not params.advection:
        return _integrate(u0, params, lambda n, u: None)
    return _integrate(u0, params, lambda n, u: advect(u, u, check=False))


def solve_stokes_linear(v0: VectorField, params: SolverParams) -> Trajectory:
    """Linear anisotropic Stokes evolution (advection disabled)."""
    linear = SolverParams(**{**params.__dict__, "advection": False})
    v0 = _prepare(v0)
    return _integrate(v0, linear, lambda n, u: None)


def solve_perturbation(v_traj: Trajectory, params: SolverParams) -> Trajectory:
    """Perturbation ``z`` with ``z(0) = 0`` driven by ``(z + v) . grad (z + v)``.

    ``v_traj`` must hold a snapshot at every step; ``v + z`` then reproduces the
    nonlinear step of :func:`solve_nse` with the same scheme exactly, up to the
    linear-solve tolerance.
    """
    if v_traj.params.stride != 1:
        raise ValueError("the linear trajectory must store every step (stride 1)")
    if not math.isclose(v_traj.params.dt, params.dt):
        raise ValueError("time steps of the linear and perturbation runs differ")
    vs = v_traj.snapshots
    grid = vs[0].grid
    n_avail = len(vs) - 1
    run = SolverParams(**{**params.__dict__, "t_end": min(params.t_end, n_avail * params.dt), "advection": True})

    def forcing(n, z):
        w = vs[n] + z
        return advect(w, w, check=False)

    return _integrate(VectorField.zeros(grid), run, forcing)
