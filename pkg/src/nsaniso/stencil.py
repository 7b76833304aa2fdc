"""Array-level finite-difference kernels on the MAC layout.

Boundary treatment per axis, chosen from where a component is stored:

* ``face``     -- the component lives on faces normal to this axis; the two end
  entries are lateral wall faces pinned to zero (Dirichlet on the normal
  component).
* ``center``   -- the component lives at cell centers along this axis; the
  no-slip wall sits half a cell outside, imposed with an antisymmetric ghost.
* ``periodic`` -- vertical direction on the full domain.
* ``half``     -- vertical direction on the half domain (one-sided differences
  at Gamma_0/Gamma_1).

All second-difference operators here are symmetric negative semidefinite in
the weighted inner product, and the squared gradient sums returned by
:func:`gradh_sq` equal ``-(D2 a, a)`` exactly (summation by parts).
"""

from __future__ import annotations

import numpy as np

from nsaniso.grid import Grid


def axis_kinds(grid: Grid, loc: str) -> tuple[str, str, str]:
    kx = "face" if loc == "xface" else "center"
    ky = "face" if loc == "yface" else "center"
    kz = "half" if grid.half_domain else "periodic"
    return kx, ky, kz


def _swap(a: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(a, axis, 0)


def d2(a: np.ndarray, axis: int, kind: str, h: float) -> np.ndarray:
    """Second difference of ``a`` along ``axis`` with the given boundary kind."""
    a0 = _swap(a, axis)
    out = np.zeros_like(a0)
    if kind == "face":
        out[1:-1] = a0[2:] - 2.0 * a0[1:-1] + a0[:-2]
    elif kind == "center":
        out[1:-1] = a0[2:] - 2.0 * a0[1:-1] + a0[:-2]
        out[0] = a0[1] - 3.0 * a0[0]
        out[-1] = a0[-2] - 3.0 * a0[-1]
    elif kind == "periodic":
        out[:] = np.roll(a0, -1, axis=0) - 2.0 * a0 + np.roll(a0, 1, axis=0)
    else:
        raise ValueError(f"d2 does not support kind {kind!r}")
    return np.moveaxis(out, 0, axis) / (h * h)


def grad_levels(a: np.ndarray, axis: int, kind: str, h: float) -> np.ndarray:
    """Per z-level sums of squared one-sided differences of ``a`` along ``axis``.

    Wall differences of ``center`` data get half a cell, matching the ghost
    used by :func:`d2`.  Multiply by ``dx*dy`` and the z-weights to integrate.
    """
    a0 = _swap(a, axis)
    if kind == "face":
        s = np.sum(np.diff(a0, axis=0) ** 2, axis=(0, 1))
    elif kind == "center":
        s = np.sum(np.diff(a0, axis=0) ** 2, axis=(0, 1)) + 2.0 * (
            np.sum(a0[0] ** 2, axis=0) + np.sum(a0[-1] ** 2, axis=0)
        )
    else:
        raise ValueError(f"grad_levels does not support kind {kind!r}")
    return s / (h * h)


def lap_h(a: np.ndarray, grid: Grid, loc: str) -> np.ndarray:
    kx, ky, _ = axis_kinds(grid, loc)
    return d2(a, 0, kx, grid.dx) + d2(a, 1, ky, grid.dy)


def gradh_sq(a: np.ndarray, grid: Grid, loc: str, zloc: str | None = None) -> float:
    """Discrete ``||grad_h a||^2`` (equals ``-(lap_h a, a)`` for valid data)."""
    kx, ky, _ = axis_kinds(grid, loc)
    levels = grad_levels(a, 0, kx, grid.dx) + grad_levels(a, 1, ky, grid.dy)
    zl = zloc or ("zface" if loc == "zface" else "zcenter")
    return float(np.dot(levels, z_weights(grid, zl))) * grid.dx * grid.dy


# vertical derivatives ------------------------------------------------------


def d3(a: np.ndarray, grid: Grid, loc: str) -> tuple[np.ndarray, str]:
    """Vertical difference; returns ``(values, new_z_location)``.

    Center data maps to z-faces and z-face data to centers.  The new
    location is reported as ``"zface"``/``"center"`` along z only; horizontal
    placement is unchanged.
    """
    dz = grid.dz
    on_faces = loc == "zface"
    if grid.periodic:
        if on_faces:
            return (np.roll(a, -1, axis=2) - a) / dz, "zcenter"
        return (a - np.roll(a, 1, axis=2)) / dz, "zface"
    if on_faces:
        return np.diff(a, axis=2) / dz, "zcenter"
    nz = grid.nz
    out = np.empty(a.shape[:2] + (nz + 1,))
    out[:, :, 1:-1] = np.diff(a, axis=2)
    out[:, :, 0] = -2.0 * a[:, :, 0] + 3.0 * a[:, :, 1] - a[:, :, 2]
    out[:, :, -1] = 2.0 * a[:, :, -1] - 3.0 * a[:, :, -2] + a[:, :, -3]
    return out / dz, "zface"


def d33(a: np.ndarray, grid: Grid, loc: str) -> np.ndarray:
    """Second vertical difference, returned at the input location."""
    if grid.periodic:
        return d2(a, 2, "periodic", grid.dz)
    first, _ = d3(a, grid, loc)
    if loc == "zface":
        # centers -> interior faces; Gamma faces stay at zero (u3 is pinned there)
        out = np.zeros_like(a)
        out[:, :, 1:-1] = np.diff(first, axis=2) / grid.dz
        return out
    return np.diff(first, axis=2) / grid.dz


def z_weights(grid: Grid, zloc: str) -> np.ndarray:
    """Vertical quadrature weights for data at z-centers or z-faces."""
    if zloc in ("center", "zcenter"):
        return np.full(grid.nz, grid.dz)
    w = np.full(grid.nz_faces, grid.dz)
    if grid.half_domain:
        w[0] = w[-1] = 0.5 * grid.dz
    return w


def h_weights(grid: Grid, loc: str) -> np.ndarray:
    """Horizontal (dx*dy) quadrature weights for the storage points of ``loc``."""
    w = np.full(grid.shape(loc)[:2], grid.dx * grid.dy)
    if loc == "xface":
        w[0] *= 0.5
        w[-1] *= 0.5
    elif loc == "yface":
        w[:, 0] *= 0.5
        w[:, -1] *= 0.5
    return w


def weighted_sq(a: np.ndarray, grid: Grid, loc: str, zloc: str | None = None) -> float:
    """``sum w a^2`` with horizontal weights of ``loc`` and vertical weights of ``zloc``."""
    zl = zloc or ("zface" if loc == "zface" else "zcenter")
    w = h_weights(grid, loc)[:, :, None] * z_weights(grid, zl)[None, None, :]
    return float(np.sum(w * a * a))


# divergence and gradient ---------------------------------------------------


def divergence(u1: np.ndarray, u2: np.ndarray, u3: np.ndarray, grid: Grid) -> np.ndarray:
    """Cell-centered divergence of a staggered field."""
    div = np.diff(u1, axis=0) / grid.dx + np.diff(u2, axis=1) / grid.dy
    if grid.periodic:
        div += (np.roll(u3, -1, axis=2) - u3) / grid.dz
    else:
        div += np.diff(u3, axis=2) / grid.dz
    return div


def gradient(phi: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Face gradient of a cell-centered scalar with zero normal flux at walls.

    This is minus the adjoint of :func:`divergence` in the weighted inner
    product, so ``divergence(gradient(.))`` is the Neumann Laplacian.
    """
    nx, ny, nz = phi.shape
    g1 = np.zeros((nx + 1, ny, nz))
    g2 = np.zeros((nx, ny + 1, nz))
    g1[1:-1] = np.diff(phi, axis=0) / grid.dx
    g2[:, 1:-1] = np.diff(phi, axis=1) / grid.dy
    if grid.periodic:
        g3 = (phi - np.roll(phi, 1, axis=2)) / grid.dz
    else:
        g3 = np.zeros((nx, ny, nz + 1))
        g3[:, :, 1:-1] = np.diff(phi, axis=2) / grid.dz
    return g1, g2, g3
