"""Grayscale image container with smoothing, gradients, interpolation and
rotation: the numeric substrate shared by every matcher.

Conventions: x is the column, y is the row, origin at the top-left, so the
intensity at pixel coordinate ``p = (x, y)`` is ``pixels[y, x]``. Intensities
are float64 in [0, 1] when loaded from files; the container itself only
requires finite values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DatasetError, ParameterError, SamplingError


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable 2-D intensity grid with an optional validity mask.

    ``valid`` is None when every pixel is usable; otherwise it is a boolean
    array of the same shape. Invalid pixels appear only as the result of
    geometric resampling (see :func:`rotate_image`) and are excluded from
    downstream statistics.
    """

    pixels: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise ParameterError(f"image must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError(f"image must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("image intensities must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)
        if self.valid is not None:
            v = np.array(self.valid, dtype=bool, order="C", copy=True)
            if v.shape != arr.shape:
                raise ParameterError(
                    f"valid mask shape {v.shape} != image shape {arr.shape}")
            v.setflags(write=False)
            object.__setattr__(self, "valid", v)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def at(self, x: int, y: int) -> float:
        """Intensity at integer pixel coordinate (x, y)."""
        return float(self.pixels[y, x])

    def mask(self) -> np.ndarray:
        """Validity mask as a boolean array (all True when unmasked)."""
        if self.valid is None:
            return np.ones(self.pixels.shape, dtype=bool)
        return self.valid

    def valid_count(self) -> int:
        if self.valid is None:
            return self.pixels.size
        return int(self.valid.sum())


@dataclass(frozen=True, eq=False)
class GradientField:
    """Spatial derivatives of a Gaussian-smoothed image."""

    gx: Image
    gy: Image
    sigma: float


def load_image(path: str | Path) -> Image:
    """Load an 8-bit grayscale PNG or PGM (binary P5), scaled into [0, 1]."""
    from PIL import Image as PILImage

    path = Path(path)
    try:
        with PILImage.open(path) as im:
            if im.mode != "L":
                raise DatasetError(
                    f"{path}: expected 8-bit grayscale, got mode {im.mode!r}")
            arr = np.asarray(im, dtype=np.float64)
    except DatasetError:
        raise
    except Exception as exc:
        raise DatasetError(f"{path}: cannot load image ({exc})") from exc
    return Image(arr / 255.0)


def save_image(img: Image, path: str | Path) -> None:
    """Write an image as 8-bit grayscale; format chosen by suffix (.png/.pgm)."""
    from PIL import Image as PILImage

    arr8 = np.rint(np.clip(img.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    PILImage.fromarray(arr8, mode="L").save(Path(path))


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Sampled normalized Gaussian truncated at radius ceil(3*sigma)."""
    if sigma < 0 or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be finite and >= 0, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    if sigma == 0.0 or radius == 0:
        return np.ones(1)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smooth_array(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge-replicated borders (array level)."""
    if sigma < 0 or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be finite and >= 0, got {sigma}")
    if sigma == 0.0:
        return arr
    k = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(arr, k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def gaussian_smooth(img: Image, sigma: float) -> Image:
    """Gaussian blur of an image; sigma = 0 returns the input unchanged."""
    if sigma == 0.0:
        return img
    return Image(smooth_array(img.pixels, sigma))


def gradient_arrays(arr: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) of the sigma-smoothed array.

    Central differences in the interior, one-sided at the borders.
    """
    s = smooth_array(arr, sigma)
    gy, gx = np.gradient(s)
    return gx, gy


def gradient(img: Image, sigma: float) -> GradientField:
    """Gradient field of the Gaussian-smoothed image."""
    if img.height < 3 or img.width < 3:
        raise ParameterError(
            f"gradient needs an image of at least 3x3, got {img.shape}")
    gx, gy = gradient_arrays(img.pixels, sigma)
    return GradientField(Image(gx), Image(gy), float(sigma))


def sample_grid(arr: np.ndarray, xs: np.ndarray, ys: np.ndarray
                ) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear samples at float coordinates plus an in-bounds mask.

    Out-of-bounds samples are returned as 0; callers decide the policy via
    the mask. Exact at lattice points.
    """
    h, w = arr.shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    xc = np.clip(xs, 0.0, w - 1.0)
    yc = np.clip(ys, 0.0, h - 1.0)
    x0 = np.clip(np.floor(xc).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(yc).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    top = (1.0 - fx) * arr[y0, x0] + fx * arr[y0, x1]
    bot = (1.0 - fx) * arr[y1, x0] + fx * arr[y1, x1]
    vals = (1.0 - fy) * top + fy * bot
    return np.where(inside, vals, 0.0), inside


def sample_bilinear(img: Image, x: float, y: float) -> float:
    """Bilinear intensity at real coordinate (x, y) inside the image."""
    if not (0.0 <= x <= img.width - 1 and 0.0 <= y <= img.height - 1):
        raise SamplingError(
            f"coordinate ({x}, {y}) outside [0, {img.width - 1}] x "
            f"[0, {img.height - 1}]")
    vals, _ = sample_grid(img.pixels, np.asarray([x]), np.asarray([y]))
    return float(vals[0])


def rotate_image(img: Image, theta: float) -> Image:
    """Rotate image content by theta radians about the image center.

    Output has the same dimensions; each output pixel is back-projected and
    bilinearly sampled. Pixels whose source falls outside the input (or onto
    invalid input pixels) are marked invalid rather than zero-filled.
    """
    if not math.isfinite(theta):
        raise ParameterError(f"theta must be finite, got {theta}")
    if theta == 0.0:
        return img
    h, w = img.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    yy, xx = np.indices((h, w), dtype=np.float64)
    dx, dy = xx - cx, yy - cy
    # back-project with the inverse rotation R(-theta)
    ct, st = math.cos(theta), math.sin(theta)
    sx = cx + ct * dx + st * dy
    sy = cy - st * dx + ct * dy
    # snap fp fuzz at the boundary (exact quarter turns land on the edge)
    eps = 1e-9
    sx = np.where((sx > -eps) & (sx < 0.0), 0.0, sx)
    sx = np.where((sx > w - 1.0) & (sx < w - 1.0 + eps), w - 1.0, sx)
    sy = np.where((sy > -eps) & (sy < 0.0), 0.0, sy)
    sy = np.where((sy > h - 1.0) & (sy < h - 1.0 + eps), h - 1.0, sy)
    vals, inside = sample_grid(img.pixels, sx, sy)
    valid = inside
    if img.valid is not None:
        vmask, _ = sample_grid(img.valid.astype(np.float64), sx, sy)
        valid = valid & (vmask >= 1.0 - 1e-9)
    pixels = np.where(valid, vals, 0.0)
    return Image(pixels, None if bool(valid.all()) else valid)
