"""Staggered (MAC) grids on Q = Omega x (0,1) and Q~ = Omega x (-1,1).

Omega is the rectangle (0, lx) x (0, ly).  Storage layout, with walls included
so that every array has a fixed shape::

    u1   x-faces, y-centers, z-centers   (nx+1, ny,   nzc)
    u2   x-centers, y-faces, z-centers   (nx,   ny+1, nzc)
    u3   x-centers, y-centers, z-faces   (nx,   ny,   nzf)
    p    cell centers                    (nx,   ny,   nzc)

On the full (periodic) domain ``nzc = nzf = nz`` and z-face ``k`` sits at
``-1 + k*dz``; face ``nz`` aliases face ``0``.  On the half domain the
z-faces include both Gamma_0 (z=0) and Gamma_1 (z=1), so ``nzf = nz + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

#: component locations, also used as ScalarField tags
LOCATIONS = ("center", "xface", "yface", "zface")


class GridError(ValueError):
    """Invalid grid configuration."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    nz: int
    lx: float = 1.0
    ly: float = 1.0
    half_domain: bool = False

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if int(n) != n or n < 4:
                raise GridError(f"{name} must be an integer >= 4, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise GridError("extents must be positive")
        if not self.half_domain and self.nz % 2:
            raise GridError(f"odd vertical resolution nz={self.nz} on the full domain")

    # spacings -------------------------------------------------------------
    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def height(self) -> float:
        return 1.0 if self.half_domain else 2.0

    @property
    def dz(self) -> float:
        return self.height / self.nz

    @property
    def z0(self) -> float:
        """Bottom of the vertical interval."""
        return 0.0 if self.half_domain else -1.0

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def volume(self) -> float:
        return self.lx * self.ly * self.height

    @property
    def min_spacing(self) -> float:
        return min(self.dx, self.dy, self.dz)

    @property
    def nz_faces(self) -> int:
        return self.nz + 1 if self.half_domain else self.nz

    @property
    def periodic(self) -> bool:
        return not self.half_domain

    @property
    def signature(self) -> str:
        dom = "half" if self.half_domain else "full"
        return f"{self.nx}x{self.ny}x{self.nz}:{self.lx:g}x{self.ly:g}:{dom}"

    # coordinates ----------------------------------------------------------
    def x_faces(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_faces(self) -> np.ndarray:
        return np.arange(self.ny + 1) * self.dy

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def z_faces(self) -> np.ndarray:
        return self.z0 + np.arange(self.nz_faces) * self.dz

    def z_centers(self) -> np.ndarray:
        return self.z0 + (np.arange(self.nz) + 0.5) * self.dz

    def shape(self, loc: str) -> tuple[int, int, int]:
        if loc == "center":
            return (self.nx, self.ny, self.nz)
        if loc == "xface":
            return (self.nx + 1, self.ny, self.nz)
        if loc == "yface":
            return (self.nx, self.ny + 1, self.nz)
        if loc == "zface":
            return (self.nx, self.ny, self.nz_faces)
        raise GridError(f"unknown location {loc!r}")

    def axes(self, loc: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """1-D coordinate arrays of the storage points of ``loc``."""
        x = self.x_faces() if loc == "xface" else self.x_centers()
        y = self.y_faces() if loc == "yface" else self.y_centers()
        z = self.z_faces() if loc == "zface" else self.z_centers()
        return x, y, z

    def mesh(self, loc: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*self.axes(loc), indexing="ij")

    def weights(self, loc: str) -> np.ndarray:
        """Midpoint-rule volume weights of the storage points of ``loc``.

        Faces lying on a boundary carry half a control volume: lateral wall
        faces of u1/u2 and, on the half domain, the Gamma_0/Gamma_1 faces of u3.
        """
        w = np.full(self.shape(loc), self.cell_volume)
        if loc == "xface":
            w[0] *= 0.5
            w[-1] *= 0.5
        elif loc == "yface":
            w[:, 0] *= 0.5
            w[:, -1] *= 0.5
        elif loc == "zface" and self.half_domain:
            w[:, :, 0] *= 0.5
            w[:, :, -1] *= 0.5
        return w

    def wall_mask(self, loc: str) -> np.ndarray:
        """True on storage points that lie on the lateral wall (normal components)."""
        m = np.zeros(self.shape(loc), dtype=bool)
        if loc == "xface":
            m[0] = m[-1] = True
        elif loc == "yface":
            m[:, 0] = m[:, -1] = True
        return m

    def gamma_mask(self) -> np.ndarray:
        """z-face indices of Gamma_0 and Gamma_1 (as a boolean mask over nz_faces)."""
        m = np.zeros(self.nz_faces, dtype=bool)
        if self.half_domain:
            m[0] = m[-1] = True
        else:
            m[0] = m[self.nz // 2] = True
        return m

    # reflection x3 -> -x3 -------------------------------------------------
    def reflect_center_index(self) -> np.ndarray:
        if self.half_domain:
            raise GridError("reflection is defined on the full domain only")
        return self.nz - 1 - np.arange(self.nz)

    def reflect_face_index(self) -> np.ndarray:
        if self.half_domain:
            raise GridError("reflection is defined on the full domain only")
        return (-np.arange(self.nz)) % self.nz

    # derived grids --------------------------------------------------------
    def doubled(self) -> "Grid":
        """Full-domain grid whose upper half coincides with this half grid."""
        if not self.half_domain:
            raise GridError("doubled() needs a half-domain grid")
        return Grid(self.nx, self.ny, 2 * self.nz, self.lx, self.ly, False)

    def halved(self) -> "Grid":
        if self.half_domain:
            raise GridError("halved() needs a full-domain grid")
        return Grid(self.nx, self.ny, self.nz // 2, self.lx, self.ly, True)

    def with_resolution(self, nx: int, ny: int, nz: int | None = None) -> "Grid":
        return Grid(nx, ny, self.nz if nz is None else nz, self.lx, self.ly, self.half_domain)


def build_grid(config: Mapping | None = None, **kwargs) -> Grid:
    """Build a :class:`Grid` from a mapping (config section) and/or keywords.

    Recognised keys: ``nx, ny, nz, lx, ly, half_domain`` (``half`` accepted as
    an alias).  String values, as read from a config file, are coerced.
    """
    cfg = dict(config or {})
    cfg.update(kwargs)
    if "half" in cfg and "half_domain" not in cfg:
        cfg["half_domain"] = cfg.pop("half")
    half = cfg.get("half_domain", False)
    if isinstance(half, str):
        half = half.strip().lower() in ("1", "true", "yes", "half")
    try:
        nx, ny, nz = (int(cfg[k]) for k in ("nx", "ny", "nz"))
    except KeyError as exc:
        raise GridError(f"missing grid key {exc.args[0]!r}") from None
    return Grid(
        nx=nx,
        ny=ny,
        nz=nz,
        lx=float(cfg.get("lx", 1.0)),
        ly=float(cfg.get("ly", 1.0)),
        half_domain=bool(half),
    )
