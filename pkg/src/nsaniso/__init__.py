"""Numerical laboratory for the anisotropic Navier-Stokes equations on a cylinder.

The half cylinder ``Q = Omega x (0, 1)`` is mapped onto the vertically periodic
cylinder ``Q~ = Omega x (-1, 1)`` by symmetric extension, regularized problems
with vertical viscosity ``eps`` are integrated there, and the energy estimates
governing the ``eps -> 0`` limit are evaluated as executable checks.
"""

from nsaniso.grid import Grid, GridError, build_grid
from nsaniso.fields import ScalarField, VectorField, FieldError, norm, inner

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "GridError",
    "build_grid",
    "ScalarField",
    "VectorField",
    "FieldError",
    "norm",
    "inner",
    "__version__",
]
