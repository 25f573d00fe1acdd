"""Raster crop/resample tests, including the jit/numpy kernel cross-check."""
import numpy as np
import pytest

from shadowheight.dataset import BoundingBox, crop_and_resize, load_png, resample_rect, save_png
from shadowheight.dataset.raster import _bilinear_numpy, _bilinear_kernel
from shadowheight.errors import DegenerateCrop, ShapeMismatch


def checkerboard(size=100, cell=2):
    row = (np.arange(size) // cell) % 2
    board = (row[:, None] ^ row[None, :]).astype(np.uint8) * 255
    return np.stack([board] * 3, axis=-1)


class TestValidation:

    def test_rejects_wrong_shape(self):
        with pytest.raises(ShapeMismatch):
            crop_and_resize(np.zeros((50, 50), dtype=np.uint8), BoundingBox(0, 0.5, 0.5, 1, 1))
        with pytest.raises(ShapeMismatch):
            crop_and_resize(np.zeros((50, 50, 4), dtype=np.uint8), BoundingBox(0, 0.5, 0.5, 1, 1))

    def test_rejects_wrong_dtype(self):
        with pytest.raises(ShapeMismatch):
            crop_and_resize(np.zeros((50, 50, 3), dtype=np.float32), BoundingBox(0, 0.5, 0.5, 1, 1))

    def test_degenerate_crop(self):
        img = np.zeros((400, 400, 3), dtype=np.uint8)
        with pytest.raises(DegenerateCrop):
            crop_and_resize(img, BoundingBox(0, 0.5, 0.5, 0.002, 0.5))


class TestCropAndResize:

    def test_output_shape(self):
        img = np.random.default_rng(0).integers(0, 256, (400, 400, 3), dtype=np.uint8)
        out = crop_and_resize(img, BoundingBox(0, 0.5, 0.5, 0.3, 0.2))
        assert out.shape == (50, 50, 3) and out.dtype == np.uint8

    def test_full_image_downsample_of_constant(self):
        img = np.full((400, 400, 3), 137, dtype=np.uint8)
        out = crop_and_resize(img, BoundingBox(0, 0.5, 0.5, 1.0, 1.0))
        assert np.all(out == 137)

    def test_constant_color_any_bbox(self):
        img = np.zeros((200, 300, 3), dtype=np.uint8)
        img[:] = (12, 200, 77)
        out = crop_and_resize(img, BoundingBox(0, 0.4, 0.6, 0.37, 0.21))
        assert np.all(out.reshape(-1, 3) == (12, 200, 77))

    def test_checkerboard_mean_preserved(self):
        # Brute-force oracle: mean of the source crop region (60x60 -> 50x50).
        img = checkerboard(100, 2)
        bbox = BoundingBox(0, 0.5, 0.5, 0.6, 0.6)
        x0, y0, x1, y1 = bbox.to_pixels((100, 100))
        crop = img[int(y0):int(y1), int(x0):int(x1)].astype(np.float64)
        out = crop_and_resize(img, bbox).astype(np.float64)
        assert abs(out.mean() - crop.mean()) <= 0.01 * 255

    def test_gradient_downsample_matches_sampling_model(self):
        # Horizontal ramp: bilinear sampling returns the ramp at sample positions.
        width = 200
        ramp = np.tile(np.linspace(0, 255, width, dtype=np.uint8), (100, 1))
        img = np.stack([ramp] * 3, axis=-1)
        out = crop_and_resize(img, BoundingBox(0, 0.5, 0.5, 1.0, 1.0))
        xs = (np.arange(50) + 0.5) * (width / 50.0) - 0.5
        expected = np.interp(xs, np.arange(width), img[0, :, 0].astype(float))
        assert np.allclose(out[25, :, 0], expected, atol=1.0)

    def test_whole_image_case_50x50_identity(self):
        img = np.random.default_rng(1).integers(0, 256, (50, 50, 3), dtype=np.uint8)
        out = crop_and_resize(img, BoundingBox(0, 0.5, 0.5, 1.0, 1.0))
        assert np.array_equal(out, img)


class TestKernelParity:

    def test_loop_kernel_and_numpy_fallback_agree(self):
        # The jit kernel's Python source against the vectorized fallback.
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, (120, 90, 3), dtype=np.uint8).astype(np.float64)
        out_a = np.empty((50, 50, 3))
        out_b = np.empty((50, 50, 3))
        _bilinear_kernel(img, 5.0, 7.0, 1.3, 1.7, out_a)
        _bilinear_numpy(img, 5.0, 7.0, 1.3, 1.7, out_b)
        assert np.allclose(out_a, out_b, atol=1e-12)


class TestPngIo:

    def test_round_trip(self, tmp_path):
        img = np.random.default_rng(5).integers(0, 256, (64, 48, 3), dtype=np.uint8)
        path = tmp_path / "img.png"
        save_png(img, path)
        assert np.array_equal(load_png(path), img)
