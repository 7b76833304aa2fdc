"""Differential operators, skew-symmetric advection, Leray projection and Stokes solves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from nsaniso import spectral, stencil
from nsaniso.fields import COMPONENT_LOCS, FieldError, ScalarField, VectorField, norm
from nsaniso.grid import Grid


class SolverError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


# elementary differences -----------------------------------------------------------


def divergence(u: VectorField) -> np.ndarray:
    return stencil.divergence(u.u1, u.u2, u.u3, u.grid)


def divergence_h(u: VectorField) -> np.ndarray:
    g = u.grid
    return np.diff(u.u1, axis=0) / g.dx + np.diff(u.u2, axis=1) / g.dy


def divergence_scale(u: VectorField) -> float:
    """Scale ``||u||_L2 / h_min`` against which divergence residuals are judged."""
    return norm(u, "L2") / u.grid.min_spacing


def max_divergence(u: VectorField) -> float:
    return float(np.max(np.abs(divergence(u))))


def is_solenoidal(u: VectorField, rtol: float = 1e-10) -> bool:
    return max_divergence(u) <= rtol * max(divergence_scale(u), np.finfo(float).tiny)


def apply_diff(u, op: str):
    """Apply one of ``grad_h, div, div_h, d3, laplacian_h, d33``.

    ``grad_h`` takes a cell-centred :class:`ScalarField` and returns the pair
    of x-face and y-face fields (zero normal flux at walls).  ``div`` and
    ``div_h`` take a :class:`VectorField` and return a cell-centred field.
    ``laplacian_h`` and ``d33`` return the input type.  ``d3`` returns a
    field at the dual vertical location for scalars stored at centres or
    z-faces, and a tuple of arrays for vector input.
    """
    g = u.grid
    if op == "grad_h":
        if not isinstance(u, ScalarField) or u.loc != "center":
            raise FieldError("grad_h needs a cell-centred scalar field")
        g1, g2, _ = stencil.gradient(u.values, g)
        return ScalarField(g, "xface", g1), ScalarField(g, "yface", g2)
    if op in ("div", "div_h"):
        if not isinstance(u, VectorField):
            raise FieldError(f"{op} needs a vector field")
        return ScalarField(g, "center", divergence(u) if op == "div" else divergence_h(u))
    if op in ("laplacian_h", "d33"):
        fn = stencil.lap_h if op == "laplacian_h" else stencil.d33
        if isinstance(u, VectorField):
            return VectorField(g, *(fn(a, g, loc) for a, loc in u.items()))
        return ScalarField(g, u.loc, fn(u.values, g, u.loc))
    if op == "d3":
        if isinstance(u, VectorField):
            return tuple(stencil.d3(a, g, loc)[0] for a, loc in u.items())
        if u.loc not in ("center", "zface"):
            raise FieldError(f"d3 of a {u.loc} scalar has no storage location")
        vals, _ = stencil.d3(u.values, g, u.loc)
        return ScalarField(g, "zface" if u.loc == "center" else "center", vals)
    raise FieldError(f"unknown operator {op!r}")


# skew-symmetric advection ------------------------------------------------------------


def _avg(a: np.ndarray, axis: int) -> np.ndarray:
    """Mean of neighbours along ``axis`` (length shrinks by one)."""
    lo = np.take(a, np.arange(a.shape[axis] - 1), axis=axis)
    hi = np.take(a, np.arange(1, a.shape[axis]), axis=axis)
    return 0.5 * (lo + hi)


def _pad(a: np.ndarray, axis: int, before: int, after: int) -> np.ndarray:
    width = [(0, 0)] * a.ndim
    width[axis] = (before, after)
    return np.pad(a, width)


def _skew_bounded(v: np.ndarray, flux: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Skew term along a bounded axis.

    ``flux[m]`` is the advecting velocity on the control-volume face between
    points ``m - 1`` and ``m`` (length ``n + 1``); boundary faces carry zero.
    """
    n = v.shape[axis]
    nxt = _pad(np.take(v, np.arange(1, n), axis=axis), axis, 0, 1)
    prv = _pad(np.take(v, np.arange(n - 1), axis=axis), axis, 1, 0)
    hi = np.take(flux, np.arange(1, n + 1), axis=axis)
    lo = np.take(flux, np.arange(n), axis=axis)
    return (hi * nxt - lo * prv) / (2.0 * h)


def _skew_periodic(v: np.ndarray, flux_up: np.ndarray, h: float) -> np.ndarray:
    """Periodic skew term; ``flux_up[k]`` sits between points ``k`` and ``k + 1``."""
    return (flux_up * np.roll(v, -1, axis=2) - np.roll(flux_up, 1, axis=2) * np.roll(v, 1, axis=2)) / (
        2.0 * h
    )


def advect(u: VectorField, v: VectorField, check: bool = True, rtol: float = 1e-8) -> VectorField:
    """Skew-symmetric discretisation of ``(u . grad) v``.

    Each component of ``v`` is advected on its own control volume with the
    face-averaged transport velocity of ``u``; the result equals
    ``1/2 [u . grad v + div(u v)]`` for solenoidal ``u`` and its matrix in
    ``v`` is exactly antisymmetric, so ``inner(advect(u, v), v) == 0`` up to
    roundoff.  Full-domain (vertically periodic) grids only.
    """
    g = u.grid
    if v.grid != g:
        raise FieldError("advect needs fields on one grid")
    if g.half_domain:
        raise FieldError("advect is implemented on the full domain")
    if check and not is_solenoidal(u, rtol):
        raise FieldError(
            f"advecting field is not solenoidal (max |div| {max_divergence(u):.3e})"
        )
    u1, u2, u3 = u.components
    up3 = np.roll(u3, -1, axis=2)  # u3 on the face above each z-centre

    # u1 control volumes: centred on x-faces
    fx = _pad(_avg(u1, 0), 0, 1, 1)
    fy = _pad(_pad(_avg(u2[:, 1:-1], 0), 0, 1, 1), 1, 1, 1)
    fz = _pad(_avg(up3, 0), 0, 1, 1)
    n1 = (
        _skew_bounded(v.u1, fx, 0, g.dx)
        + _skew_bounded(v.u1, fy, 1, g.dy)
        + _skew_periodic(v.u1, fz, g.dz)
    )
    n1[0] = n1[-1] = 0.0

    # u2 control volumes: centred on y-faces
    fx = _pad(_pad(_avg(u1[1:-1], 1), 1, 1, 1), 0, 1, 1)
    fy = _pad(_avg(u2, 1), 1, 1, 1)
    fz = _pad(_avg(up3, 1), 1, 1, 1)
    n2 = (
        _skew_bounded(v.u2, fx, 0, g.dx)
        + _skew_bounded(v.u2, fy, 1, g.dy)
        + _skew_periodic(v.u2, fz, g.dz)
    )
    n2[:, 0] = n2[:, -1] = 0.0

    # u3 control volumes: centred on z-faces; face k sits between centres k-1 and k
    fx = 0.5 * (u1 + np.roll(u1, 1, axis=2))
    fy = 0.5 * (u2 + np.roll(u2, 1, axis=2))
    fz = 0.5 * (u3 + np.roll(u3, -1, axis=2))
    n3 = (
        _skew_bounded(v.u3, fx, 0, g.dx)
        + _skew_bounded(v.u3, fy, 1, g.dy)
        + _skew_periodic(v.u3, fz, g.dz)
    )
    return VectorField(g, n1, n2, n3)


# Leray projection ------------------------------------------------------------------


def _poisson_cg(rhs: np.ndarray, grid: Grid, rtol: float, maxiter: int) -> np.ndarray:
    """Jacobi-preconditioned CG for ``-div grad phi = -rhs`` on mean-free data."""
    shape = rhs.shape

    def neg_lap(x):
        x = x.reshape(shape)
        return -stencil.divergence(*stencil.gradient(x - x.mean(), grid), grid).ravel()

    def nbr_count(n, h, periodic=False):
        c = np.full(n, 2.0 / h**2)
        if not periodic:
            c[0] = c[-1] = 1.0 / h**2
        return c

    diag = (
        nbr_count(grid.nx, grid.dx)[:, None, None]
        + nbr_count(grid.ny, grid.dy)[None, :, None]
        + nbr_count(grid.nz, grid.dz, grid.periodic)[None, None, :]
    ).ravel()
    n = rhs.size
    A = LinearOperator((n, n), matvec=neg_lap, dtype=float)
    M = LinearOperator((n, n), matvec=lambda x: x / diag, dtype=float)
    b = -(rhs - rhs.mean()).ravel()
    x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M)
    if info != 0:
        res = np.linalg.norm(A.matvec(x) - b) / max(np.linalg.norm(b), 1e-300)
        raise SolverError("pressure Poisson CG did not converge", res)
    x = x.reshape(shape)
    return x - x.mean()


def pressure_potential(u: VectorField, method: str = "spectral", rtol: float = 1e-13, maxiter: int = 5000):
    """Potential ``phi`` with ``div grad phi = div u`` (the Leray pressure)."""
    rhs = divergence(u)
    if method == "spectral":
        return spectral.poisson_neumann(rhs, u.grid)
    if method == "cg":
        return _poisson_cg(rhs, u.grid, rtol, maxiter)
    raise ValueError(f"unknown Poisson method {method!r}")


def leray_project(u: VectorField, method: str = "spectral", return_pressure: bool = False, **kw):
    """Orthogonal projection onto discretely solenoidal fields.

    Wall-normal entries are zeroed first; the pressure Poisson problem has
    homogeneous Neumann lateral conditions and is vertically periodic on the
    full domain.  ``method`` selects the fast-transform solve or a
    Jacobi-preconditioned CG.
    """
    w = u.copy().enforce_walls()
    phi = pressure_potential(w, method, **kw)
    g1, g2, g3 = stencil.gradient(phi, w.grid)
    out = VectorField(w.grid, w.u1 - g1, w.u2 - g2, w.u3 - g3)
    if return_pressure:
        return out, ScalarField(w.grid, "center", phi)
    return out


# linear Stokes solve ------------------------------------------------------------------


def helmholtz_apply(u: VectorField, shift: float, a_h: float, a_v: float) -> VectorField:
    """``(shift - a_h lap_h - a_v d33) u`` componentwise, walls pinned."""
    g = u.grid
    out = VectorField(
        g,
        *(shift * a - a_h * stencil.lap_h(a, g, loc) - a_v * stencil.d33(a, g, loc) for a, loc in u.items()),
    )
    return out.enforce_walls()


def helmholtz_inverse(u: VectorField, shift: float, a_h: float, a_v: float) -> VectorField:
    g = u.grid
    return VectorField(g, *(spectral.helmholtz_solve(a, g, loc, shift, a_h, a_v) for a, loc in u.items()))


@dataclass
class StokesSolveInfo:
    iterations: int
    residual: float


def stokes_solve(
    rhs: VectorField,
    shift: float,
    a_h: float,
    a_v: float,
    rtol: float = 1e-12,
    maxiter: int = 500,
    x0: VectorField | None = None,
) -> tuple[VectorField, StokesSolveInfo]:
    """Solve ``(shift - a_h lap_h - a_v d33) u + grad p = rhs``, ``div u = 0``.

    Conjugate gradients on the solenoidal subspace with operator ``P H`` and
    preconditioner ``P H^-1 P``; the iterate stays discretely solenoidal, so
    the pressure never needs to be formed.
    """
    g = rhs.grid
    n = rhs.flat().size
    counter = {"it": 0}

    def proj(x):
        return leray_project(VectorField.from_flat(g, x)).flat()

    def op(x):
        v = VectorField.from_flat(g, x)
        return proj(helmholtz_apply(v, shift, a_h, a_v).flat())

    def prec(x):
        v = leray_project(VectorField.from_flat(g, x))
        return proj(helmholtz_inverse(v, shift, a_h, a_v).flat())

    def callback(_):
        counter["it"] += 1

    b = proj(rhs.flat())
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return VectorField.zeros(g), StokesSolveInfo(0, 0.0)
    start = prec(b) if x0 is None else proj(x0.flat())
    A = LinearOperator((n, n), matvec=op, dtype=float)
    M = LinearOperator((n, n), matvec=prec, dtype=float)
    x, info = cg(A, b, x0=start, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=callback)
    res = float(np.linalg.norm(op(x) - b) / bnorm)
    if info != 0:
        raise SolverError("Stokes CG did not converge", res)
    return leray_project(VectorField.from_flat(g, x)), StokesSolveInfo(counter["it"], res)
