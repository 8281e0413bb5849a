import numpy as np
import pytest

from minkvox import (
    BallKernel,
    GaussianKernel,
    KernelSupportError,
    VoxelGrid,
    cube_symmetries,
    fft_convolve,
    kernel_name,
    sample_kernel,
    shift,
    support_radius,
)
from minkvox.filters import GAUSSIAN_TRUNCATION_SIGMAS

from gridmakers import binary_laminate, random_grid

KERNELS = (GaussianKernel(1.2), GaussianKernel(2.0), BallKernel(1.2),
           BallKernel(2.5))


def test_kernel_validation_and_names():
    with pytest.raises(ValueError):
        GaussianKernel(0.0)
    with pytest.raises(ValueError):
        BallKernel(-1.0)
    assert kernel_name(None) == "none"
    assert kernel_name(GaussianKernel(1.0)) == "gaussian"
    assert kernel_name(BallKernel(1.0)) == "ball"
    assert support_radius(None, 2.0) == 0.0
    assert support_radius(GaussianKernel(1.5), 2.0) == GAUSSIAN_TRUNCATION_SIGMAS * 3.0
    assert support_radius(BallKernel(1.5), 2.0) == 3.0


def test_sample_kernel_normalization():
    for kern in KERNELS:
        for h in (0.5, 1.0, 2.0):
            vals = sample_kernel(kern, (24, 20, 22), h)
            assert abs(vals.sum() * h**3 - 1.0) <= 1e-12, (kern, h)
            assert vals.min() >= 0.0


def test_ball_kernel_support_sigma_1_2():
    # radius 1.2 contains exactly the origin and the six face neighbors
    vals = sample_kernel(BallKernel(1.2), (32, 32, 32), 1.0)
    nz = np.argwhere(vals > 0)
    assert len(nz) == 7
    offs = {tuple(np.where(i > 16, i - 32, i)) for i in nz}
    assert offs == {(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                    (0, 0, 1), (0, 0, -1)}
    assert np.unique(vals[vals > 0]).size == 1  # indicator: all equal
    assert vals[0, 0, 0] == pytest.approx(1 / 7)


def test_ball_kernel_subvoxel_degenerates_to_identity():
    vals = sample_kernel(BallKernel(0.4), (16, 16, 16), 1.0)
    assert vals[0, 0, 0] == 1.0
    assert np.count_nonzero(vals) == 1


def test_sample_kernel_support_errors():
    with pytest.raises(KernelSupportError):
        sample_kernel(GaussianKernel(2.0), (8, 32, 32), 1.0)  # 3*2 >= 4
    with pytest.raises(KernelSupportError):
        sample_kernel(BallKernel(4.0), (8, 32, 32), 1.0)
    # fits: radius strictly below half the shortest edge
    sample_kernel(BallKernel(3.9), (8, 32, 32), 1.0)


def test_sampled_kernels_invariant_under_cube_group():
    # origin-centered action: transpose axes, then reverse indices about the
    # periodic origin (i -> -i mod n); sampled kernels must be bitwise fixed
    dims = (16, 16, 16)
    for kern in KERNELS:
        vals = sample_kernel(kern, dims, 1.0)
        rev = (16 - np.arange(16)) % 16
        for mat, _ in cube_symmetries():
            perm = [int(np.argmax(np.abs(mat[k]))) for k in range(3)]
            out = np.transpose(vals, perm)
            for ax in range(3):
                if mat[ax, perm[ax]] < 0:
                    out = out[tuple(rev if a == ax else slice(None)
                                    for a in range(3))]
            assert np.array_equal(out, vals), (kern, mat)


def test_convolution_preserves_constants():
    for kern in KERNELS:
        g = VoxelGrid(np.full((18, 18, 18), 0.37), spacing=1.0, depth=None)
        out = fft_convolve(g, kern)
        assert np.max(np.abs(out.values - 0.37)) <= 1e-12, kern
        assert out.depth is None


def test_convolution_none_is_identity():
    rng = np.random.default_rng(3)
    g = random_grid(rng, (10, 11, 12), depth=2)
    out = fft_convolve(g, None)
    assert np.array_equal(out.values, g.values)
    assert out.depth == g.depth


def test_convolution_preserves_mean():
    rng = np.random.default_rng(44)
    for kern in KERNELS:
        for _ in range(3):
            g = random_grid(rng, (16, 18, 20))
            out = fft_convolve(g, kern)
            assert abs(out.mean() - g.mean()) <= 1e-12, kern


def test_convolution_commutes_with_shifts():
    rng = np.random.default_rng(45)
    g = random_grid(rng, (16, 16, 16))
    for kern in KERNELS:
        for _ in range(3):
            d = tuple(int(v) for v in rng.integers(-8, 9, size=3))
            a = fft_convolve(shift(g, d), kern)
            b = shift(fft_convolve(g, kern), d)
            assert np.max(np.abs(a.values - b.values)) <= 1e-12, (kern, d)


def test_convolution_output_stays_in_unit_interval():
    g = binary_laminate()
    for kern in KERNELS:
        out = fft_convolve(g, kern)
        assert out.values.min() >= 0.0
        assert out.values.max() <= 1.0


def test_ball_filter_laminate_profile_is_linear_ramp():
    # slab edges fall on voxel boundaries; with sigma = 2.5 the discrete ball
    # kernel turns the step into a straight ramp of width 2*sigma
    sigma = 2.5
    g = binary_laminate(axis=0, n=24, lo=6, hi=14)
    out = fft_convolve(g, BallKernel(sigma))
    profile = out.values[:, 0, 0]
    assert np.max(np.abs(out.values - profile[:, None, None])) <= 1e-12

    diffs = np.diff(profile)
    rising = diffs[np.abs(diffs) > 1e-9]
    # two symmetric transitions, each 2*sigma = 5 cells wide
    assert len(rising) == 10
    # saturated plateaus away from the interfaces
    assert profile[9] == pytest.approx(1.0, abs=1e-12)
    assert profile[1] == pytest.approx(0.0, abs=1e-12)
    # interior slope cells of each ramp are constant...
    up = rising[:5]
    assert np.max(np.abs(up[1:4] - up[2])) <= 1e-12
    # ...and the net slope across the ramp is 1/(2 h sigma)
    net = up.sum() / (len(up) * g.spacing)
    assert net == pytest.approx(1 / (2 * g.spacing * sigma), rel=0.02)


def test_gaussian_truncation_tail_is_zero():
    vals = sample_kernel(GaussianKernel(1.0), (32, 32, 32), 1.0)
    # offset (4, 0, 0) lies beyond the 3-sigma cut
    assert vals[4, 0, 0] == 0.0
    assert vals[3, 0, 0] > 0.0
