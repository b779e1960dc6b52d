import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bilinear_closed_form, dense_convolve2d_replicate, \
    finite_differences
from smallprint import (Image, gaussian_smooth, gradient, load_image,
                        rotate_image, sample_bilinear, save_image)
from smallprint.errors import DatasetError, ParameterError, SamplingError
from smallprint.image import gaussian_kernel1d


class TestImageContainer:
    def test_rejects_bad_shapes(self):
        with pytest.raises(ParameterError):
            Image(np.zeros((0, 4)))
        with pytest.raises(ParameterError):
            Image(np.zeros(9))

    def test_rejects_non_finite(self):
        arr = np.ones((3, 3))
        arr[1, 1] = np.nan
        with pytest.raises(ParameterError):
            Image(arr)

    def test_immutable_and_detached(self):
        src = np.ones((3, 3))
        img = Image(src)
        src[0, 0] = 7.0
        assert img.at(0, 0) == 1.0
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 2.0

    def test_mask_shape_checked(self):
        with pytest.raises(ParameterError):
            Image(np.ones((3, 3)), np.ones((2, 3), dtype=bool))


class TestGaussianSmooth:
    def test_constant_preserved(self, rng):
        img = Image(np.full((9, 13), 0.37))
        for sigma in (0.5, 1.0, 3.0):
            out = gaussian_smooth(img, sigma)
            assert np.allclose(out.pixels, 0.37, atol=1e-12)

    def test_sigma_zero_is_identity(self, rng):
        img = Image(rng.random((6, 6)))
        assert gaussian_smooth(img, 0.0) is img

    def test_negative_sigma_rejected(self):
        with pytest.raises(ParameterError):
            gaussian_smooth(Image(np.ones((4, 4))), -1.0)

    def test_impulse_matches_dense_convolution(self):
        arr = np.zeros((11, 11))
        arr[5, 5] = 1.0
        k1 = gaussian_kernel1d(1.0)
        kernel2d = np.outer(k1, k1)
        expected = dense_convolve2d_replicate(arr, kernel2d)
        out = gaussian_smooth(Image(arr), 1.0)
        assert np.allclose(out.pixels, expected, atol=1e-12)
        # the center block is exactly the sampled normalized kernel
        assert np.allclose(out.pixels[2:9, 2:9], kernel2d, atol=1e-12)

    def test_kernel_truncation_radius(self):
        assert len(gaussian_kernel1d(1.0)) == 2 * 3 + 1
        assert len(gaussian_kernel1d(0.4)) == 2 * 2 + 1  # ceil(1.2) = 2


class TestGradient:
    def test_constant_is_zero(self):
        g = gradient(Image(np.full((7, 7), 0.8)), 1.0)
        assert np.allclose(g.gx.pixels, 0.0, atol=1e-12)
        assert np.allclose(g.gy.pixels, 0.0, atol=1e-12)

    def test_x_ramp(self):
        yy, xx = np.indices((8, 8))
        g = gradient(Image(xx / 10.0), 0.0)
        assert np.allclose(g.gx.pixels[:, 1:-1], 0.1, atol=1e-12)
        assert np.allclose(g.gy.pixels, 0.0, atol=1e-12)

    def test_matches_finite_difference_oracle(self, rng):
        img = Image(rng.random((9, 9)))
        g = gradient(img, 1.0)
        smoothed = gaussian_smooth(img, 1.0).pixels
        gx, gy = finite_differences(smoothed)
        assert np.abs(g.gx.pixels - gx).max() < 1e-9
        assert np.abs(g.gy.pixels - gy).max() < 1e-9

    def test_too_small_rejected(self):
        with pytest.raises(ParameterError):
            gradient(Image(np.ones((2, 5))), 1.0)


class TestSampleBilinear:
    def test_exact_at_lattice(self, rng):
        img = Image(rng.random((6, 7)))
        for y in range(6):
            for x in range(7):
                assert sample_bilinear(img, x, y) == pytest.approx(
                    img.at(x, y), abs=1e-12)

    def test_midpoint_linearity(self):
        img = Image(np.asarray([[0.0, 2.0]]))
        assert sample_bilinear(img, 0.5, 0.0) == pytest.approx(1.0)

    def test_random_coords_match_closed_form(self, rng):
        img = Image(rng.random((9, 11)))
        for _ in range(100):
            x = rng.uniform(0, 10)
            y = rng.uniform(0, 8)
            assert sample_bilinear(img, x, y) == pytest.approx(
                bilinear_closed_form(img.pixels, x, y), abs=1e-12)

    def test_out_of_bounds_raises(self):
        img = Image(np.ones((4, 4)))
        with pytest.raises(SamplingError):
            sample_bilinear(img, -0.01, 1.0)
        with pytest.raises(SamplingError):
            sample_bilinear(img, 1.0, 3.01)

    @settings(max_examples=50, deadline=None)
    @given(fx=st.floats(0, 1), x0=st.integers(0, 8))
    def test_linear_along_grid_axis(self, fx, x0):
        vals = np.arange(20, dtype=np.float64).reshape(2, 10) ** 1.5
        img = Image(vals)
        x = min(x0 + fx, 9.0)
        expected = bilinear_closed_form(vals, x, 0.0)
        assert sample_bilinear(img, x, 0.0) == pytest.approx(expected,
                                                             abs=1e-12)


class TestRotateImage:
    def test_zero_rotation_identity(self, rng):
        img = Image(rng.random((5, 8)))
        out = rotate_image(img, 0.0)
        assert out is img
        assert out.valid is None

    def test_quarter_turn_is_index_permutation(self, rng):
        arr = rng.random((4, 4))
        out = rotate_image(Image(arr), math.pi / 2)
        # back-projection maps out[y, x] <- in[n-1-x, y]
        expected = np.asarray([[arr[3 - x, y] for x in range(4)]
                               for y in range(4)])
        assert out.valid is None or out.valid.all()
        assert np.allclose(out.pixels, expected, atol=1e-9)

    def test_round_trip_interior(self, rng):
        from conftest import smooth_random_image
        img = smooth_random_image(rng, (48, 48))
        theta = math.radians(17.0)
        back = rotate_image(rotate_image(img, theta), -theta)
        sl = slice(12, 36)
        inner_valid = back.mask()[sl, sl]
        assert inner_valid.all()
        diff = np.abs(back.pixels[sl, sl] - img.pixels[sl, sl])
        assert diff.max() <= 0.05

    def test_invalid_pixels_are_marked_not_zero_filled(self, rng):
        img = Image(rng.random((16, 16)) * 0.5 + 0.5)
        out = rotate_image(img, math.radians(30.0))
        assert out.valid is not None
        assert not out.valid.all()
        assert out.valid.sum() > 0.5 * out.pixels.size

    def test_non_finite_theta_rejected(self):
        with pytest.raises(ParameterError):
            rotate_image(Image(np.ones((4, 4))), float("nan"))


class TestImageIO:
    def test_png_round_trip(self, tmp_path, rng):
        img = Image(rng.random((20, 30)))
        path = tmp_path / "x.png"
        save_image(img, path)
        back = load_image(path)
        assert back.shape == img.shape
        assert np.abs(back.pixels - img.pixels).max() <= 0.5 / 255 + 1e-9

    def test_pgm_round_trip(self, tmp_path, rng):
        img = Image(rng.random((12, 9)))
        path = tmp_path / "x.pgm"
        save_image(img, path)
        back = load_image(path)
        assert np.abs(back.pixels - img.pixels).max() <= 0.5 / 255 + 1e-9

    def test_values_scaled_into_unit_range(self, tmp_path):
        img = Image(np.asarray([[0.0, 1.0]]))
        path = tmp_path / "y.png"
        save_image(img, path)
        back = load_image(path)
        assert back.pixels.min() == 0.0
        assert back.pixels.max() == 1.0

    def test_non_grayscale_rejected(self, tmp_path):
        from PIL import Image as PILImage
        path = tmp_path / "rgb.png"
        PILImage.new("RGB", (8, 8), (10, 20, 30)).save(path)
        with pytest.raises(DatasetError):
            load_image(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_image(tmp_path / "nope.png")
