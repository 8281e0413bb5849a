"""Fiber orientation estimation from the gray-value structure tensor.

The local structure tensor is the outer product of the image gradient with
itself, blurred componentwise by a second filter.  Its eigenvector for the
smallest eigenvalue is the direction of least gray-value variation, which for
fibrous structures is the local fiber axis.  Averaging the outer products of
these eigenvectors over all sufficiently structured voxels and normalizing by
the trace yields an estimate of the second-order orientation tensor
A = <p p^T>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImageError
from .filters import Kernel, fft_convolve, kernel_name, kernel_transfer, apply_transfer
from .gradient import gradient
from .minkowski import SymTensor3, unit_trace
from .voxelgrid import VoxelGrid

__all__ = ["OrientationResult", "structure_tensor_orientation", "orientation_error"]

DEFAULT_MASK_THRESHOLD_REL = 1e-3
EIGENVALUE_TIE_REL = 1e-12


@dataclass(frozen=True)
class OrientationResult:
    """Estimated orientation tensor plus the configuration that produced it."""

    a_est: SymTensor3
    masked_voxels: int
    total_voxels: int
    first_kernel: str
    first_sigma: float | None
    second_kernel: str
    second_sigma: float
    scheme: str
    mask_threshold_rel: float


def structure_tensor_orientation(
    image: VoxelGrid,
    first_kernel: Kernel,
    second_kernel: Kernel,
    scheme: str = "central",
    mask_threshold_rel: float = DEFAULT_MASK_THRESHOLD_REL,
) -> OrientationResult:
    """Estimate the second-order fiber orientation tensor of an image.

    Parameters
    ----------
    image : VoxelGrid
        Gray-value image of a fibrous structure.
    first_kernel : Kernel
        Optional smoothing applied to the image before taking the gradient
        (None for no smoothing).
    second_kernel : Kernel
        Blur applied to each of the six structure-tensor components.  This
        spreads interface information into the fiber interior and is
        mandatory; passing None raises ValueError.
    scheme : str
        Finite-difference scheme for the gradient.
    mask_threshold_rel : float
        Voxels whose blurred structure-tensor trace falls below this fraction
        of the maximum trace are ignored.  A non-positive value disables the
        mask, i.e. every voxel contributes.

    Voxels where the two smallest eigenvalues coincide (within 1e-12 of the
    largest one) have no unique fiber axis; they contribute the normalized
    projector onto the tied eigenspace instead, so the result stays
    deterministic and equivariant.
    """
    if second_kernel is None:
        raise ValueError("the structure tensor requires a second blur kernel")

    grad = gradient(fft_convolve(image, first_kernel), scheme)
    g = grad.data
    transfer = kernel_transfer(second_kernel, image.dims, image.spacing)

    pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
    blurred = np.empty(image.dims + (6,))
    for slot, (i, j) in enumerate(pairs):
        blurred[..., slot] = apply_transfer(g[..., i] * g[..., j], transfer)

    trace = blurred[..., 0] + blurred[..., 1] + blurred[..., 2]
    if mask_threshold_rel > 0:
        mask = trace >= mask_threshold_rel * trace.max()
    else:
        mask = np.ones(image.dims, dtype=bool)
    count = int(mask.sum())
    if count == 0 or trace.max() <= 0:
        raise DegenerateImageError("no voxel carries structure-tensor signal")

    tensors = np.empty((count, 3, 3))
    sel = blurred[mask]
    for slot, (i, j) in enumerate(pairs):
        tensors[:, i, j] = sel[:, slot]
        tensors[:, j, i] = sel[:, slot]

    vals, vecs = np.linalg.eigh(tensors)  # ascending eigenvalues
    scale = np.abs(vals[:, 2])
    tied_low = vals[:, 1] - vals[:, 0] <= EIGENVALUE_TIE_REL * scale
    tied_all = tied_low & (vals[:, 2] - vals[:, 1] <= EIGENVALUE_TIE_REL * scale)

    v1 = vecs[:, :, 0]
    contrib = np.einsum("ni,nj->nij", v1, v1)
    if tied_low.any():
        # two-fold tie: average projector onto the bottom eigenspace
        v3 = vecs[tied_low, :, 2]
        contrib[tied_low] = (np.eye(3) - np.einsum("ni,nj->nij", v3, v3)) / 2
    if tied_all.any():
        contrib[tied_all] = np.eye(3) / 3

    a_mat = contrib.sum(axis=0)
    a_mat = (a_mat + a_mat.T) / 2
    return OrientationResult(
        a_est=SymTensor3(unit_trace(a_mat)),
        masked_voxels=count,
        total_voxels=int(np.prod(image.dims)),
        first_kernel=kernel_name(first_kernel),
        first_sigma=None if first_kernel is None else first_kernel.sigma,
        second_kernel=kernel_name(second_kernel),
        second_sigma=second_kernel.sigma,
        scheme=scheme,
        mask_threshold_rel=mask_threshold_rel,
    )


def orientation_error(estimate: SymTensor3, reference: SymTensor3) -> float:
    """Relative Frobenius deviation of an orientation tensor estimate."""
    denom = reference.frobenius()
    if denom == 0.0:
        raise ValueError("reference orientation tensor must be nonzero")
    return float(np.linalg.norm(reference.mat - estimate.mat)) / denom
