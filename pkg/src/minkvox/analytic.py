"""Closed-form reference values for balls, cylinders and fiber systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .minkowski import SymTensor3, unit_trace

__all__ = [
    "BallQuantities",
    "FiberSpec",
    "SymTensor4",
    "SYM4_INDEX_ORDER",
    "ball_quantities",
    "steiner_volume",
    "cylinder_normal_tensor",
    "cylinder_qnt",
    "fiber_system_tensors",
]


@dataclass(frozen=True)
class BallQuantities:
    """Intrinsic volumes and interface tensor of a solid ball."""

    volume: float
    surface_area: float
    normal_tensor: SymTensor3
    qnt: SymTensor3
    mean_width_integral: float  # V_1 in the Steiner expansion
    euler: float  # V_0


def ball_quantities(radius: float) -> BallQuantities:
    """Exact quantities of a ball: V = 4 pi R^3 / 3, S = 4 pi R^2, W = S/9 * Id."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r = float(radius)
    surface = 4 * np.pi * r**2
    return BallQuantities(
        volume=4 * np.pi * r**3 / 3,
        surface_area=surface,
        normal_tensor=SymTensor3(np.eye(3) * (surface / 9)),
        qnt=SymTensor3(np.eye(3) / 3),
        mean_width_integral=4 * r,
        euler=1.0,
    )


def steiner_volume(radius: float, epsilon: float) -> float:
    """Volume of the parallel body of a ball at distance epsilon.

    V(K_eps) = V + eps S + pi eps^2 V_1 + (4 pi / 3) eps^3 V_0, which for a
    ball collapses to (4 pi / 3)(R + eps)^3.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    q = ball_quantities(radius)
    return (
        q.volume
        + epsilon * q.surface_area
        + np.pi * epsilon**2 * q.mean_width_integral
        + (4 * np.pi / 3) * epsilon**3 * q.euler
    )


@dataclass(frozen=True)
class FiberSpec:
    """Straight flat-capped cylindrical fiber with unit axis p."""

    axis: tuple[float, float, float]
    length: float
    diameter: float

    def __post_init__(self):
        if not (self.length > 0 and self.diameter > 0):
            raise ValueError("fiber length and diameter must be positive")
        n = float(np.linalg.norm(self.axis))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"fiber axis must be a unit vector, |axis| = {n}")

    def aspect(self) -> float:
        return self.length / self.diameter

    def outer(self) -> np.ndarray:
        p = np.asarray(self.axis, dtype=np.float64)
        return np.outer(p, p)


def cylinder_normal_tensor(fiber: FiberSpec) -> SymTensor3:
    """Interface tensor of a capped cylinder.

    W = (pi D^2 / 6) [ p p^T + (L/D) (Id - p p^T) ]; the first term collects
    the two flat caps, the second the lateral surface.
    """
    pp = fiber.outer()
    a = fiber.aspect()
    return SymTensor3(np.pi * fiber.diameter**2 / 6 * (pp + a * (np.eye(3) - pp)))


def cylinder_qnt(fiber: FiberSpec) -> SymTensor3:
    """Unit-trace interface tensor of a capped cylinder.

    QNT = 1/(1 + 2 L/D) [ p p^T + (L/D)(Id - p p^T) ]; its eigenvalue ratio
    is D/L for L >= D, so long thin fibers are strongly anisotropic.
    """
    pp = fiber.outer()
    a = fiber.aspect()
    return SymTensor3(unit_trace(pp + a * (np.eye(3) - pp)))


# fully symmetric rank-4 tensors have 15 independent components; this is the
# storage order (sorted index quadruples, lexicographic)
SYM4_INDEX_ORDER = tuple(
    (i, j, k, l)
    for i in range(3)
    for j in range(i, 3)
    for k in range(j, 3)
    for l in range(k, 3)
)


@dataclass(frozen=True)
class SymTensor4:
    """Totally symmetric rank-4 tensor stored as its 15 independent components."""

    components: np.ndarray

    def __post_init__(self):
        comp = np.ascontiguousarray(np.asarray(self.components, dtype=np.float64))
        if comp.shape != (15,):
            raise ValueError(f"expected 15 components, got shape {comp.shape}")
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    @classmethod
    def from_full(cls, full: np.ndarray) -> "SymTensor4":
        full = np.asarray(full, dtype=np.float64)
        if full.shape != (3, 3, 3, 3):
            raise ValueError(f"expected shape (3, 3, 3, 3), got {full.shape}")
        return cls(np.array([full[idx] for idx in SYM4_INDEX_ORDER]))

    def as_array(self) -> np.ndarray:
        """Expand to the full (3, 3, 3, 3) array."""
        full = np.empty((3, 3, 3, 3))
        for comp, (i, j, k, l) in zip(self.components, SYM4_INDEX_ORDER):
            for perm in {
                (i, j, k, l), (i, j, l, k), (i, k, j, l), (i, k, l, j),
                (i, l, j, k), (i, l, k, j), (j, i, k, l), (j, i, l, k),
                (j, k, i, l), (j, k, l, i), (j, l, i, k), (j, l, k, i),
                (k, i, j, l), (k, i, l, j), (k, j, i, l), (k, j, l, i),
                (k, l, i, j), (k, l, j, i), (l, i, j, k), (l, i, k, j),
                (l, j, i, k), (l, j, k, i), (l, k, i, j), (l, k, j, i),
            }:
                full[perm] = comp
        return full


def fiber_system_tensors(
    fibers,
) -> tuple[SymTensor3, SymTensor4, SymTensor3, SymTensor3]:
    """Orientation and interface tensors of a straight-fiber system.

    Returns ``(A, A4, W, qnt)`` with the second- and fourth-order orientation
    averages A = <p p^T> and A4 = <p p p p>, the summed interface tensor
    W = sum_i W(fiber_i) and its unit-trace normalization.  Fibers are summed
    in a canonical order, so the result is exactly invariant under input
    permutations.
    """
    fibers = list(fibers)
    if not fibers:
        raise ValueError("fiber system must contain at least one fiber")
    fibers.sort(key=lambda f: (tuple(f.axis), f.length, f.diameter))

    a_mat = np.zeros((3, 3))
    a4_full = np.zeros((3, 3, 3, 3))
    w_mat = np.zeros((3, 3))
    for f in fibers:
        p = np.asarray(f.axis, dtype=np.float64)
        pp = np.outer(p, p)
        a_mat += pp
        a4_full += np.einsum("i,j,k,l->ijkl", p, p, p, p)
        w_mat += cylinder_normal_tensor(f).mat
    n = len(fibers)
    w = SymTensor3(w_mat)
    qnt = SymTensor3(unit_trace(w_mat))
    return SymTensor3(a_mat / n), SymTensor4.from_full(a4_full / n), w, qnt
