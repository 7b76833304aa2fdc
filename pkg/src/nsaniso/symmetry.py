"""Symmetric extension from the half cylinder, the reflection map and density tools.

The half domain ``Omega x (0,1)`` is doubled to the vertically periodic
``Omega x (-1,1)`` by reflecting the horizontal components evenly and the
vertical component oddly across ``x3 = 0``.  The reflection map ``S`` is the
involution whose fixed points are exactly those extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from nsaniso.fields import COMPONENT_LOCS, FieldError, ScalarField, VectorField, norm
from nsaniso.grid import Grid


# extension / restriction -------------------------------------------------------------


def sigma_extend(u: VectorField, atol: float = 1e-12) -> VectorField:
    """Extend a half-domain field to the full domain (even ``u_h``, odd ``u3``)."""
    g = u.grid
    if not g.half_domain:
        raise FieldError("sigma_extend needs a half-domain field")
    gamma = max(np.max(np.abs(u.u3[:, :, 0])), np.max(np.abs(u.u3[:, :, -1])))
    if gamma > atol * max(norm(u), 1.0):
        raise FieldError(f"u3 does not vanish on the top/bottom faces (max {gamma:.3e})")
    full = g.doubled()
    nzh = g.nz

    def even(a):
        return np.concatenate([a[:, :, ::-1], a], axis=2)

    u3 = np.empty(full.shape("zface"))
    u3[:, :, nzh:] = u.u3[:, :, :nzh]
    u3[:, :, 0] = 0.0
    u3[:, :, 1:nzh] = -u.u3[:, :, nzh - 1 : 0 : -1]
    return VectorField(full, even(u.u1), even(u.u2), u3)


def restrict(u: VectorField) -> VectorField:
    """Restriction of a full-domain field to the upper half ``x3 in (0,1)``."""
    g = u.grid
    if g.half_domain:
        raise FieldError("restrict needs a full-domain field")
    half = g.halved()
    nzh = half.nz
    u3 = np.concatenate([u.u3[:, :, nzh:], u.u3[:, :, :1]], axis=2)
    return VectorField(half, u.u1[:, :, nzh:].copy(), u.u2[:, :, nzh:].copy(), u3)


def symmetry_S(u: VectorField) -> VectorField:
    """Reflection ``(Su)_h(x3) = u_h(-x3)``, ``(Su)_3(x3) = -u_3(-x3)``."""
    g = u.grid
    if g.half_domain:
        raise FieldError("the reflection map acts on full-domain fields")
    kc = g.reflect_center_index()
    kf = g.reflect_face_index()
    return VectorField(g, u.u1[:, :, kc], u.u2[:, :, kc], -u.u3[:, :, kf])


def s_invariance_defect(u: VectorField) -> float:
    return norm(symmetry_S(u) - u, "L2")


# horizontal scaling ------------------------------------------------------------------


def _sample_axes(grid: Grid, loc: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Interpolation nodes and values-padding recipe for one component.

    Centre-located axes are extended to the walls by repeating the end value
    (constant extension of tangential data up to the boundary).
    """
    x, y, _ = grid.axes(loc)
    padx = loc != "xface"
    pady = loc != "yface"
    if padx:
        x = np.concatenate([[0.0], x, [grid.lx]])
    if pady:
        y = np.concatenate([[0.0], y, [grid.ly]])
    return x, y, padx, pady


def scale_horizontal(u: VectorField, lam: float) -> VectorField:
    """Horizontal contraction about the centre of Omega.

    ``u_{lam,i}(x_h, x3) = u*_i(c + lam (x_h - c), x3)`` for ``i = 1, 2`` and
    ``u_{lam,3} = lam u*_3(...)``, with ``u*`` the zero extension of ``u``
    outside Omega, evaluated by bilinear interpolation.  The result vanishes
    within ``(L/2)(1 - 1/lam)`` of the lateral boundary.
    """
    if not lam > 1.0:
        raise ValueError(f"scale factor must exceed 1, got {lam}")
    if lam > 2.0:
        raise ValueError(f"scale factor must lie in (1, 2], got {lam}")
    g = u.grid
    cx, cy = 0.5 * g.lx, 0.5 * g.ly
    comps = []
    for a, loc, factor in zip(u.components, COMPONENT_LOCS, (1.0, 1.0, lam)):
        xs, ys, padx, pady = _sample_axes(g, loc)
        vals = a
        if padx:
            vals = np.concatenate([vals[:1], vals, vals[-1:]], axis=0)
        if pady:
            vals = np.concatenate([vals[:, :1], vals, vals[:, -1:]], axis=1)
        interp = RegularGridInterpolator((xs, ys), vals, bounds_error=False, fill_value=0.0)
        X, Y = np.meshgrid(*g.axes(loc)[:2], indexing="ij")
        pts = np.stack([cx + lam * (X - cx), cy + lam * (Y - cy)], axis=-1)
        comps.append(factor * interp(pts))
    return VectorField(g, *comps).enforce_walls()


def scaling_margin(grid: Grid, lam: float) -> float:
    """Width of the lateral band on which a scaled field vanishes."""
    return 0.5 * min(grid.lx, grid.ly) * (1.0 - 1.0 / lam)


# horizontal mollification --------------------------------------------------------------


@dataclass
class MollifierKernel:
    """Normalised bump ``(1 - r^2/eta^2)^3`` sampled on the horizontal grid."""

    eta: float
    dx: float
    dy: float
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("kernel width must be positive")
        mx = int(np.floor(self.eta / self.dx))
        my = int(np.floor(self.eta / self.dy))
        ox = np.arange(-mx, mx + 1) * self.dx
        oy = np.arange(-my, my + 1) * self.dy
        r2 = (ox[:, None] ** 2 + oy[None, :] ** 2) / self.eta**2
        w = np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** 3, 0.0)
        self.weights = w / w.sum()

    @classmethod
    def for_grid(cls, grid: Grid, eta: float) -> "MollifierKernel":
        return cls(eta, grid.dx, grid.dy)

    @property
    def radius(self) -> float:
        """Largest physical offset carrying nonzero weight."""
        mx, my = (s // 2 for s in self.weights.shape)
        ix, iy = np.nonzero(self.weights)
        if ix.size == 0:
            return 0.0
        return float(np.sqrt(((ix - mx) * self.dx) ** 2 + ((iy - my) * self.dy) ** 2).max())


def support_margin(u, atol: float = 0.0) -> float:
    """Smallest distance from a nonzero storage point to the lateral boundary."""
    g = u.grid
    parts = u.items() if isinstance(u, VectorField) else [(u.values, u.loc)]
    best = np.inf
    for a, loc in parts:
        mask = np.any(np.abs(a) > atol, axis=2)
        if not mask.any():
            continue
        x, y, _ = g.axes(loc)
        X, Y = np.meshgrid(x, y, indexing="ij")
        dist = np.minimum(np.minimum(X, g.lx - X), np.minimum(Y, g.ly - Y))
        best = min(best, float(dist[mask].min()))
    return best


def mollify_horizontal(u, kernel: MollifierKernel, check_support: bool = False):
    """Horizontal-only discrete convolution with ``kernel`` (zero outside Omega).

    With ``check_support`` the kernel radius must be smaller than the zero
    margin of ``u``; this is the regime where convolution commutes with the
    discrete divergence.
    """
    g = u.grid
    if not (np.isclose(kernel.dx, g.dx) and np.isclose(kernel.dy, g.dy)):
        raise ValueError("kernel was sampled for a different grid spacing")
    if check_support:
        margin = support_margin(u)
        if kernel.radius >= margin:
            raise ValueError(f"kernel radius {kernel.radius:.4g} does not fit the zero margin {margin:.4g}")
    w = kernel.weights[:, :, None]

    def conv(a):
        return ndimage.correlate(a, w, mode="constant", cval=0.0)

    if isinstance(u, VectorField):
        return VectorField(g, *(conv(a) for a in u.components)).enforce_walls()
    return ScalarField(g, u.loc, conv(u.values))


# density construction ----------------------------------------------------------------


@dataclass
class DensityStep:
    lam: float
    eta: float
    error: float
    margin: float
    zero_band: bool
    gamma_ok: bool
    max_div: float

    @property
    def valid(self) -> bool:
        return self.zero_band and self.gamma_ok


def _band_is_zero(v: VectorField, band: float) -> bool:
    g = v.grid
    for a, loc in v.items():
        x, y, _ = g.axes(loc)
        X, Y = np.meshgrid(x, y, indexing="ij")
        dist = np.minimum(np.minimum(X, g.lx - X), np.minimum(Y, g.ly - Y))
        inband = dist < band
        if np.any(a[inband] != 0.0):
            return False
    return True


def density_approximation(u: VectorField, lams, etas) -> list[DensityStep]:
    """Errors ``||mollify(scale(u, lam_k), eta_k) - u||_H01`` along a diagonal sequence.

    Each approximant is also checked to vanish on the band of width
    ``margin - radius`` next to the lateral boundary and to have ``u3 = 0``
    on the top and bottom faces (half-domain input).
    """
    from nsaniso.operators import max_divergence

    steps = []
    for lam, eta in zip(lams, etas):
        scaled = scale_horizontal(u, lam)
        kernel = MollifierKernel.for_grid(u.grid, eta)
        approx = mollify_horizontal(scaled, kernel, check_support=True)
        band = scaling_margin(u.grid, lam) - kernel.radius
        gamma_ok = True
        if u.grid.half_domain:
            gamma_ok = bool(np.all(approx.u3[:, :, 0] == 0.0) and np.all(approx.u3[:, :, -1] == 0.0))
        steps.append(
            DensityStep(
                lam=float(lam),
                eta=float(eta),
                error=norm(approx - u, "H01"),
                margin=band,
                zero_band=_band_is_zero(approx, band),
                gamma_ok=gamma_ok,
                max_div=max_divergence(approx),
            )
        )
    return steps


def diagonal_sequence(grid: Grid, count: int, lam0: float = 1.5) -> tuple[np.ndarray, np.ndarray]:
    """``lam_k = 1 + (lam0 - 1) 2^-k`` with ``eta_k`` half the scaling margin."""
    lams = 1.0 + (lam0 - 1.0) * 0.5 ** np.arange(count)
    etas = np.array([0.5 * scaling_margin(grid, lam) for lam in lams])
    return lams, etas
