"""Finite-difference gradient fields on periodic grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .voxelgrid import VoxelGrid

__all__ = ["SCHEMES", "VectorField", "gradient", "unit_normals"]

SCHEMES = ("central", "forward", "backward")


@dataclass(frozen=True)
class VectorField:
    """Per-voxel 3-vectors on the same periodic lattice as a VoxelGrid."""

    data: np.ndarray  # (nx, ny, nz, 3)
    spacing: float
    scheme: str

    def __post_init__(self):
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if data.ndim != 4 or data.shape[3] != 3:
            raise ValueError(f"expected shape (nx, ny, nz, 3), got {data.shape}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if not np.isfinite(data).all():
            raise ValueError("vector field contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape[:3]

    def norms(self) -> np.ndarray:
        """Euclidean norm per voxel."""
        return np.sqrt(np.einsum("...i,...i->...", self.data, self.data))


def gradient(image: VoxelGrid, scheme: str = "central") -> VectorField:
    """Periodic finite-difference gradient of a gray-value image.

    ``central`` uses (f(x + h e_i) - f(x - h e_i)) / 2h, ``forward`` and
    ``backward`` the corresponding one-sided differences.  All stencils wrap
    around the periodic boundary.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    f = image.values
    h = image.spacing
    out = np.empty(f.shape + (3,), dtype=np.float64)
    for i in range(3):
        if scheme == "central":
            out[..., i] = (np.roll(f, -1, axis=i) - np.roll(f, 1, axis=i)) / (2 * h)
        elif scheme == "forward":
            out[..., i] = (np.roll(f, -1, axis=i) - f) / h
        else:
            out[..., i] = (f - np.roll(f, 1, axis=i)) / h
    return VectorField(out, h, scheme)


def unit_normals(field: VectorField) -> VectorField:
    """Outward unit normals n = -g / |g|; zero where the gradient vanishes."""
    norms = field.norms()
    safe = np.where(norms > 0.0, norms, 1.0)
    data = -field.data / safe[..., None]
    data[norms == 0.0] = 0.0
    return VectorField(data, field.spacing, field.scheme)
