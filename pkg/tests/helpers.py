"""Small builders shared by the test modules."""

import numpy as np

from nsaniso import VectorField, build_grid
from nsaniso.operators import leray_project


def random_field(grid, rng, walls=True):
    comps = [rng.standard_normal(grid.shape(loc)) for loc in ("xface", "yface", "zface")]
    u = VectorField(grid, *comps)
    return u.enforce_walls() if walls else u


def random_solenoidal(grid, rng):
    return leray_project(random_field(grid, rng))


def small_grid(half=False, n=6, nz=8):
    return build_grid(nx=n, ny=n, nz=nz // 2 if half else nz, half_domain=half)
