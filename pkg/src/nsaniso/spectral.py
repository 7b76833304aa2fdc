"""Fast-transform solvers for the separable operators on the MAC grid.

Each axis is diagonalised by the transform matching its boundary kind:

* Neumann cell-centre Laplacian (pressure) -- DCT-II,
* wall-normal face data (Dirichlet on interior faces) -- DST-I,
* wall-tangential centre data (antisymmetric ghost) -- DST-II,
* periodic vertical direction -- real FFT.

The discrete eigenvalues are those of the 3-point stencils in
:mod:`nsaniso.stencil`, so the solves are exact up to roundoff.
"""

from __future__ import annotations

import numpy as np
from scipy import fft

from nsaniso import stencil
from nsaniso.grid import Grid


def _sin2(k: np.ndarray, denom: float, h: float) -> np.ndarray:
    return -(4.0 / (h * h)) * np.sin(np.pi * k / denom) ** 2


def neumann_eigs(n: int, h: float) -> np.ndarray:
    return _sin2(np.arange(n), 2 * n, h)


def dirichlet_face_eigs(n: int, h: float) -> np.ndarray:
    """Eigenvalues for the ``n - 1`` interior faces of an axis with ``n`` cells."""
    return _sin2(np.arange(1, n), 2 * n, h)


def dirichlet_center_eigs(n: int, h: float) -> np.ndarray:
    return _sin2(np.arange(1, n + 1), 2 * n, h)


def periodic_eigs(n: int, h: float) -> np.ndarray:
    return _sin2(np.arange(n // 2 + 1), n, h)


def _bcast(v: np.ndarray, axis: int) -> np.ndarray:
    shape = [1, 1, 1]
    shape[axis] = v.size
    return v.reshape(shape)


# pressure Poisson --------------------------------------------------------------


def poisson_neumann(rhs: np.ndarray, grid: Grid) -> np.ndarray:
    """Solve ``div grad phi = rhs`` at cell centres, returning the mean-free solution.

    Lateral walls are homogeneous Neumann; the vertical direction is periodic on
    the full domain and Neumann on the half domain.  The mean of ``rhs`` is
    discarded (it lies outside the range of the operator).
    """
    nx, ny, nz = rhs.shape
    lam = _bcast(neumann_eigs(nx, grid.dx), 0) + _bcast(neumann_eigs(ny, grid.dy), 1)
    hat = fft.dctn(rhs, type=2, axes=(0, 1), norm="ortho")
    if grid.periodic:
        hat = fft.rfft(hat, axis=2)
        lam = lam + _bcast(periodic_eigs(nz, grid.dz), 2)
    else:
        hat = fft.dct(hat, type=2, axis=2, norm="ortho")
        lam = lam + _bcast(neumann_eigs(nz, grid.dz), 2)
    lam = np.broadcast_to(lam, hat.shape).copy()
    lam[0, 0, 0] = 1.0
    hat = hat / lam
    hat[0, 0, 0] = 0.0
    if grid.periodic:
        hat = fft.irfft(hat, n=nz, axis=2)
    else:
        hat = fft.idct(hat, type=2, axis=2, norm="ortho")
    return fft.idctn(hat, type=2, axes=(0, 1), norm="ortho")


# component Helmholtz -------------------------------------------------------------


def _forward(a: np.ndarray, axis: int, kind: str) -> np.ndarray:
    if kind == "face":
        inner = np.take(a, np.arange(1, a.shape[axis] - 1), axis=axis)
        return fft.dst(inner, type=1, axis=axis, norm="ortho")
    return fft.dst(a, type=2, axis=axis, norm="ortho")


def _backward(a: np.ndarray, axis: int, kind: str) -> np.ndarray:
    if kind == "face":
        inner = fft.idst(a, type=1, axis=axis, norm="ortho")
        pad = [(0, 0)] * 3
        pad[axis] = (1, 1)
        return np.pad(inner, pad)
    return fft.idst(a, type=2, axis=axis, norm="ortho")


def _axis_eigs(n: int, h: float, kind: str) -> np.ndarray:
    return dirichlet_face_eigs(n, h) if kind == "face" else dirichlet_center_eigs(n, h)


def helmholtz_symbol(grid: Grid, loc: str, shift: float, a_h: float, a_v: float) -> np.ndarray:
    """Transform-space symbol of ``shift - a_h*lap_h - a_v*d33`` for one component."""
    if grid.half_domain:
        raise ValueError("component Helmholtz solves are implemented on the full domain")
    kx, ky, _ = stencil.axis_kinds(grid, loc)
    lam_h = _bcast(_axis_eigs(grid.nx, grid.dx, kx), 0) + _bcast(_axis_eigs(grid.ny, grid.dy, ky), 1)
    nzf = grid.nz_faces
    lam_v = _bcast(periodic_eigs(nzf, grid.dz), 2)
    return shift - a_h * lam_h - a_v * lam_v


def helmholtz_solve(
    rhs: np.ndarray, grid: Grid, loc: str, shift: float, a_h: float, a_v: float
) -> np.ndarray:
    """Solve ``(shift - a_h*lap_h - a_v*d33) x = rhs`` for one velocity component.

    Wall entries of wall-normal components are returned as zero.  With
    ``shift == 0`` the vertically constant, horizontally Dirichlet problem is
    still nonsingular because no horizontal mode is constant.
    """
    kx, ky, _ = stencil.axis_kinds(grid, loc)
    sym = helmholtz_symbol(grid, loc, shift, a_h, a_v)
    hat = _forward(_forward(rhs, 0, kx), 1, ky)
    hat = fft.rfft(hat, axis=2) / sym
    out = fft.irfft(hat, n=rhs.shape[2], axis=2)
    return _backward(_backward(out, 1, ky), 0, kx)
