"""Leading eigenpairs of the discrete Stokes operator and spectral projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from nsaniso import stencil
from nsaniso.fields import FieldError, VectorField, gradh_sq, inner, l2_sq, norm
from nsaniso.grid import Grid
from nsaniso.operators import SolverError, leray_project, stokes_solve

MAX_MODES = 64


def dirichlet_min_eig_1d(n: int, h: float) -> float:
    """Smallest eigenvalue of the 1-D Dirichlet second difference on ``n - 1`` interior faces."""
    d = np.full(n - 1, 2.0 / h**2)
    e = np.full(n - 2, -1.0 / h**2)
    return float(eigh_tridiagonal(d, e, select="i", select_range=(0, 0), eigvals_only=True)[0])


def poincare_lambda0(grid: Grid) -> float:
    """``1 / mu_1`` with ``mu_1`` the smallest eigenvalue of ``-lap_h`` (Dirichlet walls)."""
    mu1 = dirichlet_min_eig_1d(grid.nx, grid.dx) + dirichlet_min_eig_1d(grid.ny, grid.dy)
    return 1.0 / mu1


def poincare_lambda0_closed_form(grid: Grid) -> float:
    mu1 = 4.0 / grid.dx**2 * np.sin(np.pi / (2 * grid.nx)) ** 2
    mu1 += 4.0 / grid.dy**2 * np.sin(np.pi / (2 * grid.ny)) ** 2
    return 1.0 / mu1


def apply_stokes(u: VectorField, vertical_weight: float = 1.0) -> VectorField:
    """``-P(lap_h + w d33) u``."""
    g = u.grid
    lap = VectorField(
        g,
        *(
            stencil.lap_h(a, g, loc) + vertical_weight * stencil.d33(a, g, loc)
            for a, loc in u.items()
        ),
    )
    return -leray_project(lap)


@dataclass
class StokesEigenBasis:
    grid: Grid
    eigenvalues: np.ndarray
    fields: list
    residuals: np.ndarray
    lambda0: float
    vertical_weight: float

    def __len__(self):
        return len(self.fields)

    def gram(self) -> np.ndarray:
        k = len(self.fields)
        G = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                G[i, j] = G[j, i] = inner(self.fields[i], self.fields[j])
        return G


def _solenoidal_inverse(grid: Grid, weight: float):
    """Flat-vector action of ``A^-1 P`` (zero on gradients)."""

    def matvec(x):
        rhs = VectorField.from_flat(grid, x)
        sol, _ = stokes_solve(rhs, 0.0, 1.0, weight, rtol=1e-13, maxiter=1000)
        return sol.flat()

    return matvec


def _recover_multiplicities(op, vals, vecs, want, rng, batch=6, rounds=20):
    """Add eigenvectors that single-vector Lanczos missed in repeated eigenvalues.

    A Krylov space grown from one start vector holds only one direction per
    eigenspace in exact arithmetic, so copies of a repeated eigenvalue can be
    missed.  The operator is deflated by the vectors found so far and
    searched again until nothing larger than the smallest kept value remains.
    """
    n = vecs.shape[0]
    for _ in range(rounds):
        basis = vecs

        def deflated(x, basis=basis):
            x = x - basis @ (basis.T @ x)
            y = op.matvec(x)
            return y - basis @ (basis.T @ y)

        dop = LinearOperator((n, n), matvec=deflated, dtype=float)
        start = deflated(op.matvec(rng.standard_normal(n)))
        extra = min(batch, n - basis.shape[1] - 2)
        if extra < 1:
            break
        new_vals, new_vecs = eigsh(dop, k=extra, which="LA", v0=start, ncv=min(n - 1, 4 * extra + 10), tol=1e-12)
        keep = new_vals > vals.min() * (1.0 + 1e-8)
        if not keep.any():
            break
        vals = np.concatenate([vals, new_vals[keep]])
        vecs = np.column_stack([vecs, new_vecs[:, keep]])
        order = np.argsort(vals)[::-1][:want]
        vals, vecs = vals[order], vecs[:, order]
        vecs, _ = np.linalg.qr(vecs)
    return vals, vecs


def stokes_eigenbasis(
    grid: Grid,
    k: int,
    vertical_weight: float = 1.0,
    cap: int = MAX_MODES,
    tol: float = 1e-8,
    seed: int = 0,
) -> StokesEigenBasis:
    """Leading ``k`` eigenpairs of ``A = -P(lap_h + w d33)`` on the full domain.

    ``vertical_weight = 1`` is the isotropic Stokes operator; other values
    weight the vertical second difference.  The inverse of ``A`` is applied
    with the solenoidal Stokes solve and its largest eigenvalues are found by
    Lanczos iteration, followed by a Rayleigh-Ritz refinement in the
    L2-weighted inner product.
    """
    if grid.half_domain:
        raise FieldError("the Stokes eigenbasis is built on the full domain")
    if not 1 <= k <= cap:
        raise ValueError(f"requested {k} modes, allowed 1..{cap}")
    if vertical_weight < 0:
        raise ValueError("vertical weight must be nonnegative")
    n = VectorField.zeros(grid).flat().size
    op = LinearOperator((n, n), matvec=_solenoidal_inverse(grid, vertical_weight), dtype=float)
    rng = np.random.default_rng(seed)
    v0 = leray_project(VectorField.from_flat(grid, rng.standard_normal(n)).enforce_walls()).flat()
    # one extra pair so that lambda_{k+1} is available to callers
    want = k + 1
    ncv = min(n - 1, max(2 * want + 1, want + 20))
    try:
        vals, vecs = eigsh(op, k=want, which="LA", v0=v0, ncv=ncv, tol=1e-12, maxiter=50 * n)
        vals, vecs = _recover_multiplicities(op, vals, vecs, want, rng)
    except ArpackNoConvergence as exc:
        raise SolverError("Stokes eigensolver did not converge") from exc

    # Rayleigh-Ritz in the weighted inner product
    fields = [leray_project(VectorField.from_flat(grid, vecs[:, i])) for i in range(want)]
    Avs = [apply_stokes(f, vertical_weight) for f in fields]
    G = np.array([[inner(a, b) for b in fields] for a in fields])
    T = np.array([[inner(a, b) for b in Avs] for a in fields])
    T = 0.5 * (T + T.T)
    theta, C = eigh(T, G)
    order = np.argsort(theta)
    theta, C = theta[order], C[:, order]
    new_fields, residuals = [], []
    for j in range(want):
        f = sum((C[i, j] * fields[i] for i in range(want)), VectorField.zeros(grid))
        Af = sum((C[i, j] * Avs[i] for i in range(want)), VectorField.zeros(grid))
        scale = norm(f)
        f, Af = f / scale, Af / scale
        new_fields.append(f)
        residuals.append(norm(Af - theta[j] * f))
    residuals = np.asarray(residuals)
    if np.any(residuals[:k] > tol * theta[:k]):
        raise SolverError("Stokes eigenpairs did not reach the residual tolerance", float(residuals.max()))
    return StokesEigenBasis(
        grid=grid,
        eigenvalues=theta,
        fields=new_fields,
        residuals=residuals,
        lambda0=poincare_lambda0(grid),
        vertical_weight=vertical_weight,
    )


def project_Pk(u: VectorField, basis: StokesEigenBasis, mode: str = "inside", k: int | None = None) -> VectorField:
    """Projection onto (``inside``) or away from (``complement``) the first ``k`` eigenfields."""
    if u.grid != basis.grid:
        raise FieldError("field and eigenbasis live on different grids")
    k = len(basis) if k is None else k
    if not 0 <= k <= len(basis):
        raise ValueError(f"k={k} exceeds the basis size {len(basis)}")
    inside = VectorField.zeros(u.grid)
    for f in basis.fields[:k]:
        inside = inside + inner(u, f) * f
    if mode == "inside":
        return inside
    if mode == "complement":
        return u - inside
    raise ValueError(f"unknown projection mode {mode!r}")


def h1_sq(u: VectorField) -> float:
    """Squared full-gradient seminorm ``||grad_h u||^2 + ||d3 u||^2``."""
    from nsaniso.fields import d3_sq

    return gradh_sq(u) + d3_sq(u)


def spectral_bound_ratio(u: VectorField, basis: StokesEigenBasis, k: int) -> float:
    """``||grad P_k u||^2 / (lambda_{k+1} ||u||^2)``; at most 1 when the basis is isotropic."""
    pk = project_Pk(u, basis, "inside", k)
    denom = basis.eigenvalues[k] * l2_sq(u)
    return h1_sq(pk) / denom if denom > 0 else 0.0
