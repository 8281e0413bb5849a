"""Periodic gray-value voxel grids, analytic shapes, and sub-voxel voxelization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VoxelGrid",
    "Ball",
    "Cylinder",
    "Laminate",
    "ShapeUnion",
    "color_steps",
    "color_set",
    "shape_in_box",
    "voxelize",
    "quantize",
    "shift",
    "cube_symmetries",
]


def color_steps(depth: int) -> int:
    """Number of gray-value steps of a depth-p image: 1 for binary, p^3 - 1 otherwise."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    return 1 if depth == 1 else depth**3 - 1


def color_set(depth: int) -> np.ndarray:
    """All admissible gray values of a depth-p image, ascending."""
    m = color_steps(depth)
    return np.arange(m + 1) / m


@dataclass(frozen=True)
class VoxelGrid:
    """Scalar gray values on a periodic regular grid.

    ``values[ix, iy, iz]`` is the gray value of the voxel centered at
    ``((ix + 0.5) h, (iy + 0.5) h, (iz + 0.5) h)`` with ``h = spacing``.
    All operations treat the grid as periodic in every direction.  On disk
    the values are linearized x-fastest (Fortran ravel of this layout); see
    :mod:`minkvox.volio`.

    ``depth=None`` marks a continuous gray-value range in [0, 1]; ``depth=p``
    restricts the values to the discrete color set of depth p, i.e. {0, 1}
    for p = 1 and multiples of 1/(p^3 - 1) otherwise.  The value array is
    frozen after construction, so grids can be shared freely.
    """

    values: np.ndarray
    spacing: float
    depth: int | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 3:
            raise ValueError(f"expected a 3D value array, got ndim={vals.ndim}")
        if min(vals.shape) < 2:
            raise ValueError(f"grid dims must all be >= 2, got {vals.shape}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if vals.min() < 0.0 or vals.max() > 1.0:
            raise ValueError(
                f"gray values must lie in [0, 1], got range "
                f"[{vals.min()}, {vals.max()}]"
            )
        if self.depth is not None:
            m = color_steps(self.depth)
            snapped = np.rint(vals * m) / m
            if not np.array_equal(snapped, vals):
                raise ValueError(
                    f"values are not members of the depth-{self.depth} color set"
                )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def mean(self) -> float:
        """Mean gray value, i.e. the volume fraction of the image."""
        return float(self.values.mean())

    def box(self) -> np.ndarray:
        """Physical edge lengths of the periodic box."""
        return np.asarray(self.dims) * self.spacing


# ---------------------------------------------------------------------------
# analytic shapes

@dataclass(frozen=True)
class Ball:
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        r2 = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
        return r2 <= self.radius**2

    def bounds(self):
        c = np.asarray(self.center, dtype=float)
        r = self.radius
        return c - r, c + r


@dataclass(frozen=True)
class Cylinder:
    """Flat-capped solid cylinder given by center, unit axis, length and diameter."""

    center: tuple[float, float, float]
    axis: tuple[float, float, float]
    length: float
    diameter: float

    def __post_init__(self):
        if not (self.length > 0 and self.diameter > 0):
            raise ValueError("cylinder length and diameter must be positive")
        n = float(np.linalg.norm(self.axis))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"cylinder axis must be a unit vector, |axis| = {n}")

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        ax, ay, az = self.axis
        dx, dy, dz = x - cx, y - cy, z - cz
        t = dx * ax + dy * ay + dz * az
        rad2 = dx**2 + dy**2 + dz**2 - t**2
        return (np.abs(t) <= self.length / 2) & (rad2 <= (self.diameter / 2) ** 2)

    def bounds(self):
        c = np.asarray(self.center, dtype=float)
        a = np.asarray(self.axis, dtype=float)
        # exact axis-aligned extent of a capped cylinder
        ext = (self.length / 2) * np.abs(a) + (self.diameter / 2) * np.sqrt(
            np.clip(1.0 - a**2, 0.0, None)
        )
        return c - ext, c + ext


@dataclass(frozen=True)
class Laminate:
    """Slabs perpendicular to one coordinate axis; solid inside the closed intervals."""

    axis: int
    slabs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.axis not in (0, 1, 2):
            raise ValueError(f"laminate axis must be 0, 1 or 2, got {self.axis}")
        for lo, hi in self.slabs:
            if not lo < hi:
                raise ValueError(f"slab interval must satisfy lo < hi, got ({lo}, {hi})")

    def contains(self, x, y, z):
        coord = (x, y, z)[self.axis]
        out = np.zeros(np.broadcast(x, y, z).shape, dtype=bool)
        for lo, hi in self.slabs:
            out |= (coord >= lo) & (coord <= hi)
        return out

    def bounds(self):
        lo = np.full(3, -np.inf)
        hi = np.full(3, np.inf)
        lo[self.axis] = min(s[0] for s in self.slabs)
        hi[self.axis] = max(s[1] for s in self.slabs)
        return lo, hi


@dataclass(frozen=True)
class ShapeUnion:
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ValueError("union needs at least one member shape")

    def contains(self, x, y, z):
        out = np.zeros(np.broadcast(x, y, z).shape, dtype=bool)
        ranges = [(np.min(c), np.max(c)) for c in (x, y, z)]
        for m in self.members:
            lo, hi = m.bounds()
            if any(hi[i] < ranges[i][0] or lo[i] > ranges[i][1] for i in range(3)):
                continue
            out |= m.contains(x, y, z)
        return out

    def bounds(self):
        los, his = zip(*(m.bounds() for m in self.members))
        return np.min(los, axis=0), np.max(his, axis=0)


# ---------------------------------------------------------------------------
# voxelization

def voxelize(shape, dims, spacing: float, depth: int = 1) -> VoxelGrid:
    """Rasterize an analytic shape into a periodic gray-value grid.

    Parameters
    ----------
    shape : Ball | Cylinder | Laminate | ShapeUnion
        Body to rasterize.  Only sample points inside the box
        ``[0, dims * spacing]`` are evaluated; shapes are never wrapped
        across the periodic boundary, so keeping the body interior (or
        letting it cover the whole box) is the caller's responsibility.
        Use :func:`shape_in_box` to validate beforehand.
    dims : tuple of int
        Grid dimensions (nx, ny, nz).
    spacing : float
        Voxel edge length h.
    depth : int
        Gray-value depth p.  For p = 1 a voxel is solid iff its center lies
        inside the shape (boundary counts as inside).  For p > 1 the solid
        fraction of the p^3 sub-voxel centers is computed and snapped to the
        depth-p color set.

    Returns
    -------
    VoxelGrid with ``depth=p``.
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3 or min(dims) < 2:
        raise ValueError(f"dims must be three integers >= 2, got {dims}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")

    p = depth
    nx, ny, nz = dims
    fine = spacing / p
    cx = (np.arange(nx * p) + 0.5) * fine
    cy = (np.arange(ny * p) + 0.5) * fine
    cz = (np.arange(nz * p) + 0.5) * fine

    frac = np.empty(dims, dtype=np.float64)
    # chunk along z to bound the size of the fine boolean block
    max_cells = 1 << 24
    zstep = max(1, max_cells // (nx * p * ny * p * p))
    for z0 in range(0, nz, zstep):
        z1 = min(z0 + zstep, nz)
        block = shape.contains(
            cx[:, None, None],
            cy[None, :, None],
            cz[None, None, z0 * p : z1 * p],
        )
        frac[:, :, z0:z1] = (
            block.reshape(nx, p, ny, p, z1 - z0, p).mean(axis=(1, 3, 5))
        )

    m = color_steps(p)
    vals = np.floor(frac * m + 0.5) / m
    return VoxelGrid(vals, spacing, depth=p)


def shape_in_box(shape, dims, spacing: float) -> bool:
    """Whether the shape's bounding box fits into ``[0, dims * spacing]``."""
    box = np.asarray(dims, dtype=np.float64) * spacing
    lo, hi = shape.bounds()
    tol = 1e-9 * float(box.max())
    finite_lo = np.where(np.isfinite(lo), lo, 0.0)
    finite_hi = np.where(np.isfinite(hi), hi, box)
    return bool((finite_lo >= -tol).all() and (finite_hi <= box + tol).all())


def quantize(grid: VoxelGrid, depth: int) -> VoxelGrid:
    """Snap each gray value to the nearest member of the depth-p color set.

    Ties round toward the larger value.  Idempotent for matching depth.
    """
    m = color_steps(depth)
    vals = np.floor(grid.values * m + 0.5) / m
    return VoxelGrid(vals, grid.spacing, depth=depth)


def shift(grid: VoxelGrid, offset) -> VoxelGrid:
    """Translate the image periodically by a whole number of voxels per axis."""
    off = tuple(int(o) for o in offset)
    if len(off) != 3:
        raise ValueError(f"offset must have three components, got {offset}")
    vals = np.roll(grid.values, off, axis=(0, 1, 2))
    return VoxelGrid(vals, grid.spacing, grid.depth)


# ---------------------------------------------------------------------------
# lattice symmetries

def cube_symmetries():
    """All 48 axis-aligned symmetries of a cubic grid.

    Yields pairs ``(R, apply)`` where ``R`` is the orthogonal 3x3 matrix and
    ``apply`` maps a cubic value array onto its transformed copy.  The pair is
    consistent in the sense that voxel-center coordinates relative to the box
    center transform with ``R`` when the array is transformed with ``apply``.
    """
    for perm in itertools.permutations(range(3)):
        for flips in itertools.product((False, True), repeat=3):
            mat = np.zeros((3, 3))
            for k in range(3):
                mat[k, perm[k]] = -1.0 if flips[k] else 1.0

            def apply(arr, perm=perm, flips=flips):
                out = np.transpose(arr, perm + tuple(range(3, arr.ndim)))
                ax = tuple(i for i, f in enumerate(flips) if f)
                return np.flip(out, axis=ax).copy() if ax else out.copy()

            yield mat, apply
