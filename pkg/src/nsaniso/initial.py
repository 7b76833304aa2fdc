"""Named initial-condition families.

Every family is built as the discrete curl of an edge-located vector
potential, so the fields are discretely solenoidal to roundoff and satisfy
the wall conditions by construction.

* ``modes``          -- random combination of smooth low modes;
* ``anisotropic``    -- ``||u0|| = a eta^alpha``, ``||d3 u0|| = a eta^-alpha``;
* ``boundary_layer`` -- horizontal flow concentrated near the top and bottom
  faces, with nonzero tangential values next to the lateral walls.
"""

from __future__ import annotations

import numpy as np

from nsaniso.fields import FieldError, VectorField, d3_sq, l2_sq
from nsaniso.grid import Grid


def _dz_forward(a: np.ndarray, grid: Grid) -> np.ndarray:
    """z-faces -> z-centres."""
    if grid.periodic:
        return (np.roll(a, -1, axis=2) - a) / grid.dz
    return np.diff(a, axis=2) / grid.dz


def curl_potential(a1: np.ndarray, a2: np.ndarray, a3: np.ndarray, grid: Grid) -> VectorField:
    """Discrete curl of an edge potential.

    ``a1`` lives on (x-centre, y-face, z-face), ``a2`` on (x-face, y-centre,
    z-face) and ``a3`` on (x-face, y-face, z-centre).  Wall-tangential
    potential components must vanish on the walls for the normal velocity to
    vanish there; on the half domain ``a1`` and ``a2`` must vanish on the top
    and bottom faces.
    """
    u1 = np.diff(a3, axis=1) / grid.dy - _dz_forward(a2, grid)
    u2 = _dz_forward(a1, grid) - np.diff(a3, axis=0) / grid.dx
    u3 = np.diff(a2, axis=0) / grid.dx - np.diff(a1, axis=1) / grid.dy
    return VectorField(grid, u1, u2, u3).enforce_walls()


def _edge_mesh(grid: Grid, xf: bool, yf: bool, zf: bool):
    x = grid.x_faces() if xf else grid.x_centers()
    y = grid.y_faces() if yf else grid.y_centers()
    z = grid.z_faces() if zf else grid.z_centers()
    return np.meshgrid(x, y, z, indexing="ij")


def streamfunction_field(grid: Grid, psi, profile) -> VectorField:
    """``u_h = profile(x3) * curl_h psi``, ``u3 = 0`` with ``psi`` sampled at vertical edges."""
    X, Y, Z = _edge_mesh(grid, True, True, False)
    a3 = psi(X, Y) * profile(Z)
    a3[0] = a3[-1] = 0.0
    a3[:, 0] = a3[:, -1] = 0.0
    zeros1 = np.zeros((grid.nx, grid.ny + 1, grid.nz_faces))
    zeros2 = np.zeros((grid.nx + 1, grid.ny, grid.nz_faces))
    return curl_potential(zeros1, zeros2, a3, grid)


def normalized(u: VectorField, amplitude: float) -> VectorField:
    if amplitude < 0:
        raise ValueError("amplitudes must be nonnegative")
    size = np.sqrt(l2_sq(u))
    if size == 0.0 or amplitude == 0.0:
        return VectorField.zeros(u.grid)
    return u * (amplitude / size)


def smooth_modes(grid: Grid, amplitude: float = 1.0, seed: int = 0, max_mode: int = 2) -> VectorField:
    """Random combination of low sine/cosine modes, scaled to ``||u||_L2 = amplitude``.

    On the half domain the vertical dependence is chosen so that ``u3``
    vanishes on the top and bottom faces (the data is then admissible for
    symmetric extension).
    """
    rng = np.random.default_rng(seed)
    lx, ly = grid.lx, grid.ly
    h = grid.height
    modes = range(1, max_mode + 1)

    def vertical(Z, m, kind):
        # on the half domain: sin for potentials living on z-faces (zero on top/bottom)
        arg = m * np.pi * (Z - grid.z0) / (1.0 if grid.half_domain else 0.5 * h)
        return np.sin(arg) if kind == "sin" else np.cos(arg)

    def potential(xf, yf, zf, xs, ys):
        X, Y, Z = _edge_mesh(grid, xf, yf, zf)
        out = np.zeros(X.shape)
        for k in modes:
            for l in modes:
                for m in range(0, max_mode + 1):
                    c = rng.standard_normal()
                    fx = np.sin(k * np.pi * X / lx) if xs else np.cos(k * np.pi * X / lx)
                    fy = np.sin(l * np.pi * Y / ly) if ys else np.cos(l * np.pi * Y / ly)
                    if grid.half_domain:
                        fz = vertical(Z, m, "sin" if zf else "cos")
                    else:
                        phase = rng.uniform(0, 2 * np.pi)
                        fz = np.cos(m * np.pi * Z + phase)
                    out += c * fx * fy * fz / (k * k + l * l + m * m)
        return out

    a1 = potential(False, True, True, False, True)
    a2 = potential(True, False, True, True, False)
    a3 = potential(True, True, False, True, True)
    return normalized(curl_potential(a1, a2, a3, grid), amplitude)


def anisotropic(
    grid: Grid, eta: float, alpha: float, amplitude: float = 1.0, vertical_mode: int | None = None
) -> VectorField:
    """Family with ``||u0|| = amplitude eta^alpha`` and ``||d3 u0|| = amplitude eta^-alpha``.

    ``u_h = (a + b cos(M pi x3)) curl_h psi`` with ``psi = sin(pi x/lx) sin(pi y/ly)``
    and ``u3 = 0``; ``b`` fixes the vertical derivative and ``a`` the energy.
    The vertical mode ``M`` is the smallest one for which this is possible.
    """
    if not (eta > 0 and alpha >= 0):
        raise ValueError("need eta > 0 and alpha >= 0")
    target_l2 = amplitude * eta**alpha
    target_d3 = amplitude * eta ** (-alpha)

    def psi(X, Y):
        return np.sin(np.pi * X / grid.lx) * np.sin(np.pi * Y / grid.ly)

    mean = streamfunction_field(grid, psi, lambda Z: np.ones_like(Z))
    m_max = grid.nz // 4 if grid.half_domain else grid.nz // 8
    candidates = [vertical_mode] if vertical_mode else range(1, max(m_max, 1) + 1)
    for m in candidates:
        osc = streamfunction_field(grid, psi, lambda Z, m=m: np.cos(m * np.pi * Z))
        b = target_d3 / np.sqrt(d3_sq(osc)) if target_d3 > 0 else 0.0
        rest = target_l2**2 - b * b * l2_sq(osc)
        if rest >= 0:
            a = np.sqrt(rest / l2_sq(mean))
            return mean * a + osc * b
    raise FieldError(
        f"vertical resolution too coarse for eta={eta}, alpha={alpha}: "
        f"need a mode with pi*M >= {eta ** (-2 * alpha):.3g}"
    )


def boundary_layer(grid: Grid, amplitude: float = 1.0, thickness: float = 0.1) -> VectorField:
    """Horizontal flow ``f(x3) curl_h psi`` with ``f`` peaked at the top and bottom faces."""
    z_lo, z_hi = (0.0, 1.0)

    def profile(Z):
        d = np.minimum(np.abs(Z - z_lo), np.abs(z_hi - np.abs(Z)))
        return np.exp(-d / thickness)

    def psi(X, Y):
        return np.sin(np.pi * X / grid.lx) * np.sin(np.pi * Y / grid.ly)

    return normalized(streamfunction_field(grid, psi, profile), amplitude)


FAMILIES = ("zero", "modes", "anisotropic", "boundary_layer")


def make_initial(grid: Grid, family: str, amplitude: float = 1.0, seed: int = 0, **options) -> VectorField:
    """Dispatch on the family name used in configuration files."""
    if family == "zero":
        return VectorField.zeros(grid)
    if family == "modes":
        return smooth_modes(grid, amplitude, seed, int(options.get("max_mode", 2)))
    if family == "anisotropic":
        return anisotropic(
            grid,
            float(options["eta"]),
            float(options.get("alpha", 0.25)),
            amplitude,
            int(options["vertical_mode"]) if options.get("vertical_mode") else None,
        )
    if family == "boundary_layer":
        return boundary_layer(grid, amplitude, float(options.get("thickness", 0.1)))
    raise FieldError(f"unknown initial-condition family {family!r}; known: {FAMILIES}")
