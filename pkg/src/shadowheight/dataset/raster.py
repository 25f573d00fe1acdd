"""8-bit RGB raster handling: PNG I/O and box crops resampled to 50x50x3.

Images are plain numpy arrays of shape (height, width, 3), dtype uint8.
Bilinear resampling maps output pixel centers into the crop rectangle
(the standard half-pixel-center convention) and clamps source reads at the
image edge. The gather loop is a jitted hot kernel with a vectorized
NumPy fallback; both produce identical output.
"""
from __future__ import annotations

import numpy as np
from PIL import Image

from .._accel import JIT_ENABLED, maybe_jit
from ..errors import DegenerateCrop, ShapeMismatch
from .yolo import BoundingBox

PATCH_SIZE = (50, 50)


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeMismatch(f"expected (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ShapeMismatch(f"image must be at least 1x1, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise ShapeMismatch(f"expected uint8 samples, got {img.dtype}")
    return img


def load_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return validate_image(np.asarray(im.convert("RGB")))


def save_png(img: np.ndarray, path) -> None:
    Image.fromarray(validate_image(img), mode="RGB").save(path, format="PNG")


def _bilinear_kernel(img, x0, y0, scale_x, scale_y, out):
    height, width = img.shape[0], img.shape[1]
    for oy in range(out.shape[0]):
        sy = y0 + (oy + 0.5) * scale_y - 0.5
        sy = min(max(sy, 0.0), height - 1.0)
        iy = int(sy)
        iy1 = min(iy + 1, height - 1)
        fy = sy - iy
        for ox in range(out.shape[1]):
            sx = x0 + (ox + 0.5) * scale_x - 0.5
            sx = min(max(sx, 0.0), width - 1.0)
            ix = int(sx)
            ix1 = min(ix + 1, width - 1)
            fx = sx - ix
            for c in range(3):
                top = img[iy, ix, c] * (1.0 - fx) + img[iy, ix1, c] * fx
                bot = img[iy1, ix, c] * (1.0 - fx) + img[iy1, ix1, c] * fx
                out[oy, ox, c] = top * (1.0 - fy) + bot * fy


_bilinear_jit = maybe_jit(_bilinear_kernel)


def _bilinear_numpy(img, x0, y0, scale_x, scale_y, out):
    height, width = img.shape[0], img.shape[1]
    sy = np.clip(y0 + (np.arange(out.shape[0]) + 0.5) * scale_y - 0.5, 0.0, height - 1.0)
    sx = np.clip(x0 + (np.arange(out.shape[1]) + 0.5) * scale_x - 0.5, 0.0, width - 1.0)
    iy = sy.astype(np.int64)
    ix = sx.astype(np.int64)
    iy1 = np.minimum(iy + 1, height - 1)
    ix1 = np.minimum(ix + 1, width - 1)
    fy = (sy - iy)[:, None, None]
    fx = (sx - ix)[None, :, None]
    top = img[np.ix_(iy, ix)] * (1.0 - fx) + img[np.ix_(iy, ix1)] * fx
    bot = img[np.ix_(iy1, ix)] * (1.0 - fx) + img[np.ix_(iy1, ix1)] * fx
    out[:] = top * (1.0 - fy) + bot * fy


def resample_rect(img: np.ndarray, rect_px, out_size=PATCH_SIZE) -> np.ndarray:
    """Bilinearly resample an axis-aligned pixel rect to out_size (h, w)."""
    img = validate_image(img)
    x0, y0, x1, y1 = (float(v) for v in rect_px)
    crop_w, crop_h = x1 - x0, y1 - y0
    if crop_w < 2.0 or crop_h < 2.0:
        raise DegenerateCrop(f"crop {crop_w:.2f}x{crop_h:.2f} px is below the 2x2 minimum")
    out_h, out_w = out_size
    src = img.astype(np.float64)
    out = np.empty((out_h, out_w, 3), dtype=np.float64)
    if JIT_ENABLED:
        _bilinear_jit(src, x0, y0, crop_w / out_w, crop_h / out_h, out)
    else:
        _bilinear_numpy(src, x0, y0, crop_w / out_w, crop_h / out_h, out)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def crop_and_resize(img: np.ndarray, bbox: BoundingBox, out_size=PATCH_SIZE) -> np.ndarray:
    """Crop the bbox region and resample it to the standard patch resolution."""
    img = validate_image(img)
    height, width = img.shape[0], img.shape[1]
    return resample_rect(img, bbox.to_pixels((width, height)), out_size)
