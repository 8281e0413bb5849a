"""Shared image builders for the test suite.

Expensive voxelizations are cached so the property tests and the acceptance
tests can reuse the same grids.  All builders are deterministic.
"""

from functools import lru_cache

import numpy as np

from minkvox import (
    Ball,
    Cylinder,
    ShapeUnion,
    VoxelGrid,
    quantize,
    voxelize,
)

# Sub-voxel ball displacement, in micrometers.  Breaks all lattice mirror
# symmetries so that discretization errors do not cancel by accident; at
# h = 4 um this is (0.37h, 0.21h, 0.11h).
BALL_SHIFT_UM = (1.48, 0.84, 0.44)


@lru_cache(maxsize=None)
def displaced_ball(res: int, depth: int, box_factor: float = 1.5,
                   diameter: float = 16.0) -> VoxelGrid:
    """Ball of fixed physical diameter at D/h = res, center off the lattice."""
    h = diameter / res
    n = int(round(box_factor * res))
    dims = (n, n, n)
    center = tuple(n * h / 2 + d for d in BALL_SHIFT_UM)
    shape = Ball(center=center, radius=diameter / 2)
    return voxelize(shape, dims, h, depth)


@lru_cache(maxsize=None)
def single_voxel(n: int = 8, h: float = 1.0, at: tuple = (3, 4, 2)) -> VoxelGrid:
    vals = np.zeros((n, n, n))
    vals[at] = 1.0
    return VoxelGrid(vals, spacing=h, depth=1)


@lru_cache(maxsize=None)
def binary_laminate(axis: int = 0, n: int = 24, h: float = 1.0,
                    lo: int = 6, hi: int = 14) -> VoxelGrid:
    """One solid slab [lo*h, hi*h) along the given axis, periodic elsewhere."""
    vals = np.zeros((n, n, n))
    idx = [slice(None)] * 3
    idx[axis] = slice(lo, hi)
    vals[tuple(idx)] = 1.0
    return VoxelGrid(vals, spacing=h, depth=1)


@lru_cache(maxsize=None)
def centered_cylinder(aspect: float = 10.0, res: int = 12, depth: int = 3,
                      diameter: float = 12.0) -> VoxelGrid:
    """Axis-aligned capped cylinder, box-centered, axis e_x."""
    h = diameter / res
    L = aspect * diameter
    dims = (int(round((aspect + 1) * res)), 2 * res, 2 * res)
    center = tuple(d * h / 2 for d in dims)
    shape = Cylinder(center=center, axis=(1.0, 0.0, 0.0),
                     length=L, diameter=diameter)
    return voxelize(shape, dims, h, depth)


# Unidirectional array: 20 parallel fibers (4 x 5 square grid), axis e_x,
# L/D = 25 at D/h = 8.  Pitch 13 leaves a 5-voxel gap between surfaces.
FIBER_ARRAY_DIMS = (216, 52, 65)
FIBER_ARRAY_D = 8.0
FIBER_ARRAY_L = 200.0


@lru_cache(maxsize=None)
def fiber_array(depth: int = 2) -> VoxelGrid:
    h = 1.0
    fibers = []
    for j in range(4):
        for k in range(5):
            center = (FIBER_ARRAY_DIMS[0] * h / 2,
                      13.0 * (j + 0.5), 13.0 * (k + 0.5))
            fibers.append(Cylinder(center=center, axis=(1.0, 0.0, 0.0),
                                   length=FIBER_ARRAY_L,
                                   diameter=FIBER_ARRAY_D))
    return voxelize(ShapeUnion(tuple(fibers)), FIBER_ARRAY_DIMS, h, depth)


@lru_cache(maxsize=None)
def axis_triple_fibers(depth: int = 2) -> VoxelGrid:
    """Three orthogonal fibers of equal size, mutually disjoint."""
    h = 1.0
    n = 48
    L, D = 32.0, 6.0
    shapes = (
        Cylinder(center=(24.0, 10.0, 10.0), axis=(1.0, 0.0, 0.0), length=L, diameter=D),
        Cylinder(center=(10.0, 24.0, 38.0), axis=(0.0, 1.0, 0.0), length=L, diameter=D),
        Cylinder(center=(38.0, 38.0, 24.0), axis=(0.0, 0.0, 1.0), length=L, diameter=D),
    )
    return voxelize(ShapeUnion(shapes), (n, n, n), h, depth)


def random_grid(rng: np.random.Generator, dims=(12, 12, 12), h: float = 1.0,
                depth=None) -> VoxelGrid:
    """Uniform random gray values, optionally snapped to a color set."""
    g = VoxelGrid(rng.random(dims), spacing=h, depth=None)
    if depth is not None:
        return quantize(g, depth)
    return g
