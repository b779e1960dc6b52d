"""Feature point detection: Harris corners with local orientation, and a
DoG scale-space detector with contrast/edge rejection, sub-pixel refinement
and orientation assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError, SamplingError
from .image import Image, gradient_arrays, sample_grid, smooth_array


@dataclass(frozen=True)
class Keypoint:
    """Feature location (sub-pixel), orientation in (-pi, pi], scale in
    pixels (1.0 for Harris corners) and detector response."""

    x: float
    y: float
    theta: float
    scale: float = 1.0
    strength: float = 0.0


@dataclass(frozen=True)
class HarrisConfig:
    sigma_h: float = 1.0          # derivative scale
    sigma_theta: float = 4.0      # orientation smoothing scale
    sigma_window: float = 2.0     # structure-tensor averaging scale
    response_threshold_rel: float = 0.01
    nms_radius: float = 3.0
    max_keypoints: int = 200
    border_margin: int = 7        # half-width of the descriptor patch

    def __post_init__(self):
        if self.sigma_h <= 0 or self.sigma_theta <= 0 or self.sigma_window <= 0:
            raise ParameterError("all Harris sigmas must be > 0")
        if not (0.0 < self.response_threshold_rel < 1.0):
            raise ParameterError("response_threshold_rel must be in (0, 1)")
        if self.nms_radius <= 0 or self.max_keypoints < 1 or self.border_margin < 0:
            raise ParameterError("invalid Harris keypoint selection parameters")


@dataclass(frozen=True)
class DogConfig:
    octaves: int = 3
    scales_per_octave: int = 3
    base_sigma: float = 1.6
    contrast_threshold: float = 0.03   # on [0, 1] intensities
    edge_ratio_threshold: float = 10.0
    max_keypoints: int = 200

    def __post_init__(self):
        if self.octaves < 1:
            raise ParameterError("octaves must be >= 1")
        if self.scales_per_octave < 2:
            raise ParameterError("scales_per_octave must be >= 2")
        if self.edge_ratio_threshold <= 1:
            raise ParameterError("edge_ratio_threshold must be > 1")
        if self.base_sigma <= 0 or self.contrast_threshold <= 0:
            raise ParameterError("base_sigma and contrast_threshold must be > 0")
        if self.max_keypoints < 1:
            raise ParameterError("max_keypoints must be >= 1")


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.remainder(theta, math.tau)
    if t <= -math.pi:
        t = math.pi
    return t


def harris_response(img: Image, cfg: HarrisConfig = HarrisConfig()) -> Image:
    """Smaller structure-tensor eigenvalue per pixel.

    The gradient outer product at derivative scale sigma_h is averaged with a
    Gaussian window (sigma_window); the response is the minimum eigenvalue of
    the resulting 2x2 tensor, which is large only where intensity varies in
    two independent directions.
    """
    if img.height < 3 or img.width < 3:
        raise ParameterError(
            f"harris_response needs at least a 3x3 image, got {img.shape}")
    gx, gy = gradient_arrays(img.pixels, cfg.sigma_h)
    sxx = smooth_array(gx * gx, cfg.sigma_window)
    syy = smooth_array(gy * gy, cfg.sigma_window)
    sxy = smooth_array(gx * gy, cfg.sigma_window)
    half_tr = 0.5 * (sxx + syy)
    disc = np.sqrt(np.maximum((0.5 * (sxx - syy)) ** 2 + sxy * sxy, 0.0))
    lam_min = half_tr - disc
    # PSD tensor: clip the tiny negatives left by fp cancellation
    return Image(np.maximum(lam_min, 0.0))


def _orientations_at(img: Image, xs: np.ndarray, ys: np.ndarray,
                     sigma_theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Orientation angle and degeneracy flag at each coordinate."""
    gx, gy = gradient_arrays(img.pixels, sigma_theta)
    vx, _ = sample_grid(gx, xs, ys)
    vy, _ = sample_grid(gy, xs, ys)
    mag = np.hypot(vx, vy)
    degenerate = mag < 1e-12
    theta = np.where(degenerate, 0.0, np.arctan2(vy, vx))
    return theta, degenerate


def keypoint_orientation(img: Image, x: float, y: float,
                         sigma_theta: float = 4.0) -> tuple[float, bool]:
    """Local orientation: arctan2 of the sigma_theta-smoothed gradient,
    sampled bilinearly at (x, y).

    Returns ``(theta, degenerate)``; a zero gradient yields (0.0, True).
    """
    if not (0.0 <= x <= img.width - 1 and 0.0 <= y <= img.height - 1):
        raise SamplingError(f"({x}, {y}) outside the image")
    theta, degen = _orientations_at(
        img, np.asarray([x]), np.asarray([y]), sigma_theta)
    return float(theta[0]), bool(degen[0])


def harris_keypoints(img: Image, cfg: HarrisConfig = HarrisConfig()
                     ) -> list[Keypoint]:
    """Thresholded, non-max-suppressed Harris corners with orientations.

    Pixels at or above ``response_threshold_rel`` times the maximum response,
    outside the border margin, survive a greedy non-max suppression with the
    configured radius; the strongest ``max_keypoints`` are kept. Ordering is
    deterministic: strength descending, then y, then x.
    """
    resp = harris_response(img, cfg).pixels
    max_resp = float(resp.max())
    if max_resp <= 0.0:
        return []
    thr = cfg.response_threshold_rel * max_resp

    m = cfg.border_margin
    h, w = resp.shape
    window = 2 * int(math.ceil(cfg.nms_radius)) + 1
    local_max = resp >= ndimage.maximum_filter(resp, size=window)
    sel = np.zeros_like(resp, dtype=bool)
    if h > 2 * m and w > 2 * m:
        sel[m:h - m, m:w - m] = (resp[m:h - m, m:w - m] >= thr) \
            & local_max[m:h - m, m:w - m]
    ys, xs = np.nonzero(sel)
    if len(xs) == 0:
        return []
    strength = resp[ys, xs]
    order = np.lexsort((xs, ys, -strength))
    xs, ys, strength = xs[order], ys[order], strength[order]

    # greedy NMS: accept in strength order, reject anything too close
    acc_x: list[int] = []
    acc_y: list[int] = []
    acc_s: list[float] = []
    r2 = cfg.nms_radius ** 2
    for x, y, s in zip(xs, ys, strength):
        if acc_x:
            dx = np.asarray(acc_x) - x
            dy = np.asarray(acc_y) - y
            if np.min(dx * dx + dy * dy) < r2:
                continue
        acc_x.append(int(x))
        acc_y.append(int(y))
        acc_s.append(float(s))
        if len(acc_x) >= cfg.max_keypoints:
            break

    thetas, _ = _orientations_at(
        img, np.asarray(acc_x, dtype=np.float64),
        np.asarray(acc_y, dtype=np.float64), cfg.sigma_theta)
    return [Keypoint(float(x), float(y), wrap_angle(float(t)), 1.0, s)
            for x, y, t, s in zip(acc_x, acc_y, thetas, acc_s)]


# ---------------------------------------------------------------------------
# DoG detector

_DOG_BORDER = 5  # pixels excluded at octave borders during the extrema scan
_INPUT_SIGMA = 0.5  # assumed blur of the raw image


def _upsample2(arr: np.ndarray) -> np.ndarray:
    """Bilinear 2x upsample (edge-clamped)."""
    h, w = arr.shape
    ys = np.minimum(np.arange(2 * h, dtype=np.float64) / 2.0, h - 1.0)
    xs = np.minimum(np.arange(2 * w, dtype=np.float64) / 2.0, w - 1.0)
    gx, gy = np.meshgrid(xs, ys)
    vals, _ = sample_grid(arr, gx, gy)
    return vals


def _scale_space(arr: np.ndarray, cfg: DogConfig
                 ) -> tuple[list[list[np.ndarray]], list[float]]:
    """Per-octave Gaussian stacks and the per-layer sigma ladder.

    The first octave is the input upsampled 2x (so blob-like detail sharper
    than ``base_sigma`` is still detectable on small patches); octave o has a
    pixel step of ``2 ** (o - 1)`` relative to the input grid.
    """
    s = cfg.scales_per_octave
    k = 2.0 ** (1.0 / s)
    sigmas = [cfg.base_sigma * k ** j for j in range(s + 3)]
    octaves: list[list[np.ndarray]] = []
    # upsampling doubles the assumed input blur
    cur = smooth_array(_upsample2(arr), math.sqrt(
        max(cfg.base_sigma ** 2 - (2.0 * _INPUT_SIGMA) ** 2, 0.01)))
    for _ in range(cfg.octaves):
        if min(cur.shape) < 16:
            break
        imgs = [cur]
        for j in range(1, s + 3):
            inc = math.sqrt(sigmas[j] ** 2 - sigmas[j - 1] ** 2)
            imgs.append(smooth_array(imgs[-1], inc))
        octaves.append(imgs)
        cur = imgs[s][::2, ::2]  # the 2*base_sigma level seeds the next octave
    return octaves, sigmas


def _local_extrema(dogs: np.ndarray, pre_threshold: float) -> np.ndarray:
    """(layer, y, x) indices of 26-neighborhood extrema.

    Ties count as extrema (plateau peaks on symmetric inputs would otherwise
    vanish); the pre-threshold keeps flat regions out and the duplicate
    filter downstream collapses tied neighbors.
    """
    L, h, w = dogs.shape
    if L < 3 or h < 3 or w < 3:
        return np.zeros((0, 3), dtype=np.int64)
    center = dogs[1:-1, 1:-1, 1:-1]
    neigh_max = np.full(center.shape, -np.inf)
    neigh_min = np.full(center.shape, np.inf)
    for dl in (0, 1, 2):
        for dy in (0, 1, 2):
            for dx in (0, 1, 2):
                if dl == 1 and dy == 1 and dx == 1:
                    continue
                view = dogs[dl:dl + L - 2, dy:dy + h - 2, dx:dx + w - 2]
                np.maximum(neigh_max, view, out=neigh_max)
                np.minimum(neigh_min, view, out=neigh_min)
    is_ext = ((center >= neigh_max) | (center <= neigh_min)) \
        & (np.abs(center) >= pre_threshold)
    ls, ys, xs = np.nonzero(is_ext)
    return np.stack([ls + 1, ys + 1, xs + 1], axis=1)


def _refine_extremum(dogs: np.ndarray, l: int, y: int, x: int
                     ) -> tuple[np.ndarray, float] | None:
    """One clamped quadratic-fit step; returns (offset [dx,dy,dl], value)."""
    cube = dogs[l - 1:l + 2, y - 1:y + 2, x - 1:x + 2]
    dx = 0.5 * (cube[1, 1, 2] - cube[1, 1, 0])
    dy = 0.5 * (cube[1, 2, 1] - cube[1, 0, 1])
    dl = 0.5 * (cube[2, 1, 1] - cube[0, 1, 1])
    g = np.array([dx, dy, dl])
    c = cube[1, 1, 1]
    dxx = cube[1, 1, 2] - 2 * c + cube[1, 1, 0]
    dyy = cube[1, 2, 1] - 2 * c + cube[1, 0, 1]
    dll = cube[2, 1, 1] - 2 * c + cube[0, 1, 1]
    dxy = 0.25 * (cube[1, 2, 2] - cube[1, 2, 0] - cube[1, 0, 2] + cube[1, 0, 0])
    dxl = 0.25 * (cube[2, 1, 2] - cube[2, 1, 0] - cube[0, 1, 2] + cube[0, 1, 0])
    dyl = 0.25 * (cube[2, 2, 1] - cube[2, 0, 1] - cube[0, 2, 1] + cube[0, 0, 1])
    hess = np.array([[dxx, dxy, dxl], [dxy, dyy, dyl], [dxl, dyl, dll]])
    try:
        offset = -np.linalg.solve(hess, g)
    except np.linalg.LinAlgError:
        offset = np.zeros(3)
    offset = np.clip(offset, -0.5, 0.5)
    value = c + 0.5 * float(g @ offset)
    return offset, value


def _edge_like(dogs: np.ndarray, l: int, y: int, x: int, edge_ratio: float
               ) -> bool:
    """Principal-curvature ratio test on the 2x2 spatial Hessian."""
    layer = dogs[l]
    c = layer[y, x]
    dxx = layer[y, x + 1] - 2 * c + layer[y, x - 1]
    dyy = layer[y + 1, x] - 2 * c + layer[y - 1, x]
    dxy = 0.25 * (layer[y + 1, x + 1] - layer[y + 1, x - 1]
                  - layer[y - 1, x + 1] + layer[y - 1, x - 1])
    det = dxx * dyy - dxy * dxy
    tr = dxx + dyy
    if det <= 0:
        return True
    r = edge_ratio
    return tr * tr / det > (r + 1.0) ** 2 / r


def _dominant_orientation(gauss: np.ndarray, x: float, y: float,
                          sigma: float) -> float:
    """Peak of the 36-bin gradient-orientation histogram around (x, y)."""
    n_bins = 36
    h, w = gauss.shape
    sig = 1.5 * sigma
    radius = max(int(round(3.0 * sig)), 1)
    cx, cy = int(round(x)), int(round(y))
    x0, x1 = max(cx - radius, 1), min(cx + radius, w - 2)
    y0, y1 = max(cy - radius, 1), min(cy + radius, h - 2)
    if x1 < x0 or y1 < y0:
        return 0.0
    block = gauss[y0 - 1:y1 + 2, x0 - 1:x1 + 2]
    gx = 0.5 * (block[1:-1, 2:] - block[1:-1, :-2])
    gy = 0.5 * (block[2:, 1:-1] - block[:-2, 1:-1])
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    jj, ii = np.meshgrid(np.arange(x0, x1 + 1) - cx,
                         np.arange(y0, y1 + 1) - cy)
    weight = np.exp(-(jj ** 2 + ii ** 2) / (2.0 * sig * sig))
    bins = np.floor((ang + math.pi) / math.tau * n_bins).astype(np.int64) % n_bins
    hist = np.bincount(bins.ravel(), weights=(mag * weight).ravel(),
                       minlength=n_bins)
    if hist.max() <= 0.0:
        return 0.0
    # two passes of circular [1, 4, 6, 4, 1] / 16 smoothing
    for _ in range(2):
        hist = (6 * hist + 4 * (np.roll(hist, 1) + np.roll(hist, -1))
                + np.roll(hist, 2) + np.roll(hist, -2)) / 16.0
    peak = int(np.argmax(hist))
    left = hist[(peak - 1) % n_bins]
    right = hist[(peak + 1) % n_bins]
    denom = left - 2.0 * hist[peak] + right
    shift = 0.0 if denom == 0 else 0.5 * (left - right) / denom
    angle = (peak + 0.5 + shift) / n_bins * math.tau - math.pi
    return wrap_angle(angle)


def dog_keypoints(img: Image, cfg: DogConfig = DogConfig()) -> list[Keypoint]:
    """Difference-of-Gaussians keypoints.

    Builds the Gaussian scale space, subtracts adjacent levels and scans for
    strict 26-neighborhood extrema. Each candidate gets one clamped quadratic
    refinement step; low-contrast and edge-like responses are rejected, and
    the surviving points receive the dominant local gradient orientation and
    the effective sigma of their level as scale.
    """
    if min(img.shape) < 16:
        raise ParameterError(
            f"dog_keypoints needs at least a 16x16 image, got {img.shape}")
    s = cfg.scales_per_octave
    k = 2.0 ** (1.0 / s)
    octaves, sigmas = _scale_space(img.pixels, cfg)

    found: list[Keypoint] = []
    for oct_idx, gauss in enumerate(octaves):
        dogs = np.stack([gauss[j + 1] - gauss[j] for j in range(s + 2)])
        oh, ow = dogs.shape[1:]
        step = 2.0 ** (oct_idx - 1)  # octave 0 is the upsampled image
        for l, y, x in _local_extrema(dogs, 0.5 * cfg.contrast_threshold):
            if not (_DOG_BORDER <= x < ow - _DOG_BORDER
                    and _DOG_BORDER <= y < oh - _DOG_BORDER):
                continue
            if l < 1 or l > s:
                continue
            offset, value = _refine_extremum(dogs, l, y, x)
            if abs(value) < cfg.contrast_threshold:
                continue
            if _edge_like(dogs, l, y, x, cfg.edge_ratio_threshold):
                continue
            sigma_local = cfg.base_sigma * k ** (l + offset[2])
            theta = _dominant_orientation(
                gauss[l], x + offset[0], y + offset[1], sigma_local)
            found.append(Keypoint(
                x=float((x + offset[0]) * step),
                y=float((y + offset[1]) * step),
                theta=theta,
                scale=float(sigma_local * step),
                strength=abs(float(value))))

    found.sort(key=lambda p: (-p.strength, p.y, p.x))
    # cross-octave duplicates: same spot, similar scale, keep the stronger
    kept: list[Keypoint] = []
    for kp in found:
        dup = False
        for q in kept:
            if (kp.x - q.x) ** 2 + (kp.y - q.y) ** 2 <= 1.5 ** 2 \
                    and max(kp.scale, q.scale) / min(kp.scale, q.scale) < 1.5:
                dup = True
                break
        if not dup:
            kept.append(kp)
        if len(kept) >= cfg.max_keypoints:
            break
    return kept
