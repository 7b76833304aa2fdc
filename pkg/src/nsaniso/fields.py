"""Discrete scalar and vector fields, norms, inner products and snapshot I/O."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from nsaniso import stencil
from nsaniso.grid import LOCATIONS, Grid

COMPONENT_LOCS = ("xface", "yface", "zface")
MIXED_EXPONENTS = (1.0, 2.0, 4.0, np.inf)


class FieldError(ValueError):
    """Shape, location or grid mismatch between fields."""


@dataclass
class ScalarField:
    grid: Grid
    loc: str
    values: np.ndarray

    def __post_init__(self):
        if self.loc not in LOCATIONS:
            raise FieldError(f"unknown location tag {self.loc!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape(self.loc):
            raise FieldError(
                f"{self.loc} values have shape {self.values.shape}, grid expects {self.grid.shape(self.loc)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise FieldError("non-finite values in field")

    @classmethod
    def zeros(cls, grid: Grid, loc: str = "center") -> "ScalarField":
        return cls(grid, loc, np.zeros(grid.shape(loc)))

    @classmethod
    def from_function(cls, grid: Grid, loc: str, fn) -> "ScalarField":
        x, y, z = grid.mesh(loc)
        return cls(grid, loc, np.broadcast_to(fn(x, y, z), x.shape).copy())

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.loc, self.values.copy())


@dataclass
class VectorField:
    """Velocity-like field ``(u1, u2, u3)`` on the staggered faces of ``grid``."""

    grid: Grid
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self):
        for name, loc in zip(("u1", "u2", "u3"), COMPONENT_LOCS):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape(loc):
                raise FieldError(f"{name} has shape {a.shape}, grid expects {self.grid.shape(loc)}")
            setattr(self, name, a)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, *(np.zeros(grid.shape(loc)) for loc in COMPONENT_LOCS))

    @classmethod
    def from_functions(cls, grid: Grid, f1, f2, f3) -> "VectorField":
        comps = []
        for fn, loc in zip((f1, f2, f3), COMPONENT_LOCS):
            x, y, z = grid.mesh(loc)
            comps.append(np.broadcast_to(fn(x, y, z), x.shape).astype(float).copy())
        u = cls(grid, *comps)
        u.enforce_walls()
        return u

    @classmethod
    def from_flat(cls, grid: Grid, flat: np.ndarray) -> "VectorField":
        sizes = [int(np.prod(grid.shape(loc))) for loc in COMPONENT_LOCS]
        parts = np.split(np.asarray(flat, dtype=float), np.cumsum(sizes)[:-1])
        return cls(grid, *(p.reshape(grid.shape(loc)) for p, loc in zip(parts, COMPONENT_LOCS)))

    # container protocol ---------------------------------------------------
    @property
    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.u1, self.u2, self.u3

    def items(self) -> Iterator[tuple[np.ndarray, str]]:
        return zip(self.components, COMPONENT_LOCS)

    def flat(self) -> np.ndarray:
        return np.concatenate([c.ravel() for c in self.components])

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.u1.copy(), self.u2.copy(), self.u3.copy())

    def enforce_walls(self) -> "VectorField":
        """Pin the normal components on lateral walls (and u3 on Gamma faces) to zero."""
        self.u1[0] = self.u1[-1] = 0.0
        self.u2[:, 0] = self.u2[:, -1] = 0.0
        if self.grid.half_domain:
            self.u3[:, :, 0] = self.u3[:, :, -1] = 0.0
        return self

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c))) if c.size else 0.0 for c in self.components)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(c)) for c in self.components)

    def _check(self, other: "VectorField"):
        if not isinstance(other, VectorField):
            return NotImplemented
        if other.grid != self.grid:
            raise FieldError("fields live on different grids")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        return VectorField(self.grid, *(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.grid, *(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, s):
        return VectorField(self.grid, *(s * a for a in self.components))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return VectorField(self.grid, *(a / s for a in self.components))

    def __neg__(self):
        return VectorField(self.grid, *(-a for a in self.components))


Field = Union[ScalarField, VectorField]


def _parts(u: Field):
    if isinstance(u, VectorField):
        return list(u.items())
    if isinstance(u, ScalarField):
        return [(u.values, u.loc)]
    raise FieldError(f"expected a field, got {type(u).__name__}")


def _zloc(loc: str) -> str:
    return "zface" if loc == "zface" else "zcenter"


# squared norm pieces (used by the norms below and by the energy ledger) ----


def l2_sq(u: Field) -> float:
    return sum(stencil.weighted_sq(a, u.grid, loc) for a, loc in _parts(u))


def d3_sq(u: Field) -> float:
    total = 0.0
    for a, loc in _parts(u):
        d, zl = stencil.d3(a, u.grid, loc)
        total += stencil.weighted_sq(d, u.grid, loc, zl)
    return total


def d33_sq(u: Field) -> float:
    return sum(stencil.weighted_sq(stencil.d33(a, u.grid, loc), u.grid, loc) for a, loc in _parts(u))


def gradh_sq(u: Field) -> float:
    return sum(stencil.gradh_sq(a, u.grid, loc) for a, loc in _parts(u))


def gradh_d3_sq(u: Field) -> float:
    total = 0.0
    for a, loc in _parts(u):
        d, zl = stencil.d3(a, u.grid, loc)
        total += stencil.gradh_sq(d, u.grid, loc, zl)
    return total


def gradh_d33_sq(u: Field) -> float:
    return sum(stencil.gradh_sq(stencil.d33(a, u.grid, loc), u.grid, loc) for a, loc in _parts(u))


# norms ----------------------------------------------------------------------


def _parse_kind(kind):
    if isinstance(kind, tuple):
        if len(kind) == 3 and kind[0] == "mixed":
            return "mixed", float(kind[1]), float(kind[2])
        if len(kind) == 2:
            return "mixed", float(kind[0]), float(kind[1])
    if isinstance(kind, str):
        k = kind.strip()
        m = re.fullmatch(r"mixed\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*\)", k)
        if m:
            q, p = (np.inf if s in ("inf", "oo", "infinity") else float(s) for s in m.groups())
            return "mixed", q, p
        if k.upper() in ("L2", "H01", "H02", "H1"):
            return k.upper(), None, None
    raise FieldError(f"unsupported norm kind {kind!r}")


def _mixed_scalar(a: np.ndarray, grid: Grid, loc: str, q: float, p: float) -> float:
    wh = stencil.h_weights(grid, loc)[:, :, None]
    wz = stencil.z_weights(grid, _zloc(loc))
    absa = np.abs(a)
    if p == np.inf:
        horiz = absa.max(axis=(0, 1))
    else:
        horiz = np.sum(wh * absa**p, axis=(0, 1)) ** (1.0 / p)
    if q == np.inf:
        return float(horiz.max())
    return float(np.sum(wz * horiz**q) ** (1.0 / q))


def mixed_norm(u: Field, q: float, p: float) -> float:
    """Vertical L^q of horizontal L^p norms, the horizontal reduction done first.

    For vector fields the component norms are combined in l^q, which keeps
    ``mixed(2, 2)`` equal to the L2 norm.
    """
    if q not in MIXED_EXPONENTS or p not in MIXED_EXPONENTS:
        raise FieldError(f"unsupported mixed exponents (q={q}, p={p})")
    vals = [_mixed_scalar(a, u.grid, loc, q, p) for a, loc in _parts(u)]
    if q == np.inf:
        return max(vals)
    return float(np.sum(np.asarray(vals) ** q) ** (1.0 / q))


def norm(u: Field, kind="L2") -> float:
    """Norm of a scalar or vector field.

    ``kind`` is one of ``"L2"``, ``"H01"`` (L2 plus vertical derivative),
    ``"H02"`` (adds the second vertical derivative), ``"H1"`` (all first
    differences) or ``"mixed(q,p)"`` / ``("mixed", q, p)``.
    """
    name, q, p = _parse_kind(kind)
    if name == "mixed":
        return mixed_norm(u, q, p)
    sq = l2_sq(u)
    if name in ("H01", "H02", "H1"):
        sq += d3_sq(u)
    if name == "H02":
        sq += d33_sq(u)
    if name == "H1":
        sq += gradh_sq(u)
    return float(np.sqrt(max(sq, 0.0)))


def inner(u: Field, v: Field, kind: str = "L2") -> float:
    """L2 or H^{0,1} inner product; ``inner(u, u, k) == norm(u, k)**2``."""
    if type(u) is not type(v) or u.grid != v.grid:
        raise FieldError("inner product of fields on different grids or of different types")
    pu, pv = _parts(u), _parts(v)
    if [loc for _, loc in pu] != [loc for _, loc in pv]:
        raise FieldError("location tags do not match")
    k = kind.upper()
    if k not in ("L2", "H01"):
        raise FieldError(f"unsupported inner product kind {kind!r}")
    total = 0.0
    for (a, loc), (b, _) in zip(pu, pv):
        w = stencil.h_weights(u.grid, loc)[:, :, None] * stencil.z_weights(u.grid, _zloc(loc))[None, None, :]
        total += float(np.sum(w * a * b))
        if k == "H01":
            da, zl = stencil.d3(a, u.grid, loc)
            db, _ = stencil.d3(b, u.grid, loc)
            w3 = stencil.h_weights(u.grid, loc)[:, :, None] * stencil.z_weights(u.grid, zl)[None, None, :]
            total += float(np.sum(w3 * da * db))
    return total


# snapshot I/O -----------------------------------------------------------------


def write_snapshot(path, u: Field, tag: str | None = None) -> Path:
    """Write ``NSANISO v1`` header plus little-endian float64 component data."""
    g = u.grid
    if tag is None:
        tag = "velocity" if isinstance(u, VectorField) else f"scalar:{u.loc}"
    if not tag or any(ch.isspace() for ch in tag):
        raise FieldError("snapshot tag must be a single non-empty token")
    header = f"NSANISO v1 {g.nx} {g.ny} {g.nz} {g.lx!r} {g.ly!r} {int(g.half_domain)} {tag}\n"
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for a, _ in _parts(u):
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes(order="C"))
    return path


def read_snapshot(path) -> tuple[Field, str]:
    """Inverse of :func:`write_snapshot`; returns ``(field, tag)``."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        payload = fh.read()
    if len(header) != 9 or header[:2] != ["NSANISO", "v1"]:
        raise FieldError(f"{path}: not an NSANISO v1 snapshot")
    nx, ny, nz = (int(s) for s in header[2:5])
    grid = Grid(nx, ny, nz, float(header[5]), float(header[6]), header[7] == "1")
    tag = header[8]
    data = np.frombuffer(payload, dtype="<f8").astype(float)
    if tag.startswith("scalar:"):
        loc = tag.split(":", 1)[1]
        return ScalarField(grid, loc, data.reshape(grid.shape(loc))), tag
    expected = sum(int(np.prod(grid.shape(loc))) for loc in COMPONENT_LOCS)
    if data.size != expected:
        raise FieldError(f"{path}: payload has {data.size} values, expected {expected}")
    return VectorField.from_flat(grid, data), tag
