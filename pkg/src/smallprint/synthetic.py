"""Synthetic fingerprint generator for dataset-free evaluation.

A finger is an analytic ridge field: a base plane wave at the ridge period,
warped by a few low-frequency sinusoids so the ridge orientation varies
smoothly, with phase dislocations planted at known coordinates to act as
minutiae (one terminating or branching ridge each). Because the field is a
closed-form function of continuous coordinates, repeated acquisitions are
rendered by rigidly perturbing the sampling grid: there are no border
artifacts, only fresh sensor noise.

Ridges are rendered dark on a light background, matching the polarity
assumed by the default foreground segmentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .image import Image

CONTRAST = 0.35
NOISE_SIGMA = 0.03
MINUTIA_MARGIN = 12.0    # px from the patch border
MINUTIA_SPACING = 10.0   # px between planted minutiae
MAX_ACQ_ROTATION = math.radians(20.0)
MAX_ACQ_SHIFT = 10.0
PORE_DENSITY = 1.0 / 120.0   # pores per px^2
PORE_SIGMA = 1.8
PORE_AMP = 0.8
MOD_DEPTH = 0.55             # depth of the along-ridge contrast beading


@dataclass(frozen=True)
class Minutia:
    """A planted ridge anomaly: location plus dislocation kind."""

    x: float
    y: float
    kind: str  # "ending" or "bifurcation"


@dataclass(frozen=True, eq=False)
class RidgeField:
    """Analytic ridge phase field of one synthetic finger."""

    base_angle: float
    warp_amp: np.ndarray     # (W,)
    warp_freq: np.ndarray    # (W, 2) cycles per pixel
    warp_phase: np.ndarray   # (W,)
    minutiae: tuple[Minutia, ...]
    minutia_sign: np.ndarray  # (M,) +1 / -1
    ridge_period: float
    mod_freq: np.ndarray     # (2, 2) beading wave vectors, cycles per pixel
    mod_phase: np.ndarray    # (2,)
    pores: np.ndarray        # (P, 2) x, y of sweat pores on ridge centers

    def phase(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        ca, sa = math.cos(self.base_angle), math.sin(self.base_angle)
        p = (2.0 * math.pi / self.ridge_period) * (xs * ca + ys * sa)
        for amp, (fx, fy), ph in zip(self.warp_amp, self.warp_freq,
                                     self.warp_phase):
            p = p + amp * np.sin(2.0 * math.pi * (fx * xs + fy * ys) + ph)
        for m, s in zip(self.minutiae, self.minutia_sign):
            p = p + s * np.arctan2(ys - m.y, xs - m.x)
        return p

    def _amplitude(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Contact-pressure beading: ridge contrast swells and thins along
        the ridge lines, which is what breaks the pure-edge structure."""
        a = np.ones_like(np.asarray(xs, dtype=np.float64))
        for (fx, fy), ph in zip(self.mod_freq, self.mod_phase):
            a = a * (0.5 + 0.5 * np.sin(
                2.0 * math.pi * (fx * xs + fy * ys) + ph))
        return 1.0 - MOD_DEPTH * a

    def intensity(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Ridge shading in [0.5 - CONTRAST, 0.5 + CONTRAST], ridges dark,
        with light sweat-pore dots punched into the ridge lines."""
        out = 0.5 - CONTRAST * self._amplitude(xs, ys) * np.cos(self.phase(xs, ys))
        for px, py in self.pores:
            d2 = (xs - px) ** 2 + (ys - py) ** 2
            out = out + PORE_AMP * CONTRAST * np.exp(-d2 / (2 * PORE_SIGMA ** 2))
        return out


def _build_field(rng: np.random.Generator, size: int, ridge_period: float,
                 n_minutiae: int) -> RidgeField:
    base_angle = rng.uniform(0.0, math.pi)
    # per-finger ridge frequency jitter: unrelated fingers should not share
    # a period, or their correlation surfaces can phase-align
    period = float(ridge_period) * rng.uniform(0.8, 1.25)
    n_warp = 3
    warp_amp = rng.uniform(2.0, 3.2, size=n_warp)
    # wavelengths of one patch width and up: smooth but clear orientation drift
    freq_mag = rng.uniform(0.4, 1.3, size=n_warp) / size
    freq_ang = rng.uniform(0.0, math.tau, size=n_warp)
    warp_freq = np.stack([freq_mag * np.cos(freq_ang),
                          freq_mag * np.sin(freq_ang)], axis=1)
    warp_phase = rng.uniform(0.0, math.tau, size=n_warp)

    pts: list[tuple[float, float]] = []
    lo, hi = MINUTIA_MARGIN, size - 1 - MINUTIA_MARGIN
    attempts = 0
    while len(pts) < n_minutiae and attempts < 1000:
        attempts += 1
        x, y = rng.uniform(lo, hi), rng.uniform(lo, hi)
        if all((x - px) ** 2 + (y - py) ** 2 >= MINUTIA_SPACING ** 2
               for px, py in pts):
            pts.append((x, y))
    signs = rng.choice([-1.0, 1.0], size=len(pts))
    minutiae = tuple(
        Minutia(x, y, "ending" if s > 0 else "bifurcation")
        for (x, y), s in zip(pts, signs))

    # beading: one wave along the ridge lines plus one in a random direction
    along = base_angle + math.pi / 2.0 + rng.uniform(-0.3, 0.3)
    rnd = rng.uniform(0.0, math.tau)
    mags = np.array([1.0 / (period * rng.uniform(2.0, 2.6)),
                     1.0 / (period * rng.uniform(3.0, 4.5))])
    mod_freq = np.stack([mags * np.cos([along, rnd]),
                         mags * np.sin([along, rnd])], axis=1)
    mod_phase = rng.uniform(0.0, math.tau, size=2)

    field = RidgeField(base_angle, warp_amp, warp_freq, warp_phase,
                       minutiae, signs, period, mod_freq, mod_phase,
                       np.zeros((0, 2)))
    return RidgeField(base_angle, warp_amp, warp_freq, warp_phase,
                      minutiae, signs, period, mod_freq, mod_phase,
                      _place_pores(rng, field, size))


def _place_pores(rng: np.random.Generator, field: RidgeField, size: int
                 ) -> np.ndarray:
    """Rejection-sample pore centers onto ridge lines, away from minutiae."""
    target = max(int(size * size * PORE_DENSITY), 1)
    pores: list[tuple[float, float]] = []
    lo, hi = 3.0, size - 4.0
    for _ in range(60 * target):
        if len(pores) >= target:
            break
        x, y = rng.uniform(lo, hi), rng.uniform(lo, hi)
        on_ridge = float(np.cos(field.phase(np.asarray(x), np.asarray(y)))) > 0.85
        if not on_ridge:
            continue
        if any((x - px) ** 2 + (y - py) ** 2 < 6.0 ** 2 for px, py in pores):
            continue
        if any((x - m.x) ** 2 + (y - m.y) ** 2 < 5.0 ** 2
               for m in field.minutiae):
            continue
        pores.append((x, y))
    return np.asarray(pores).reshape(-1, 2)


def _check_params(size: int, ridge_period: float) -> None:
    if ridge_period < 4:
        raise ParameterError(f"ridge_period must be >= 4, got {ridge_period}")
    if size < 32:
        raise ParameterError(f"size must be >= 32, got {size}")


def _render(field: RidgeField, rng: np.random.Generator, size: int,
            theta: float = 0.0, shift: tuple[float, float] = (0.0, 0.0)
            ) -> Image:
    yy, xx = np.indices((size, size), dtype=np.float64)
    if theta != 0.0 or shift != (0.0, 0.0):
        c = (size - 1) / 2.0
        ct, st = math.cos(theta), math.sin(theta)
        dx, dy = xx - c, yy - c
        xs = c + ct * dx - st * dy + shift[0]
        ys = c + st * dx + ct * dy + shift[1]
    else:
        xs, ys = xx, yy
    img = field.intensity(xs, ys)
    img = img + rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    return Image(np.clip(img, 0.0, 1.0))


def generate_synthetic_finger(seed: int, size: int = 70,
                              ridge_period: float = 8.0, n_minutiae: int = 6
                              ) -> tuple[Image, list[Minutia]]:
    """Deterministic synthetic finger patch plus its minutia ground truth."""
    _check_params(size, ridge_period)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    field = _build_field(rng, size, ridge_period, n_minutiae)
    img = _render(field, rng, size)
    return img, list(field.minutiae)


def synthetic_acquisition(seed: int, acq_index: int, size: int = 70,
                          ridge_period: float = 8.0, n_minutiae: int = 6
                          ) -> Image:
    """One acquisition of the finger identified by ``seed``.

    The same finger field is sampled under a random rigid perturbation
    (|rotation| <= 20 degrees, shift within a 10 px disk) with fresh noise;
    the perturbation and noise derive from (seed, acq_index).
    """
    _check_params(size, ridge_period)
    finger_rng = np.random.default_rng(np.random.SeedSequence(seed))
    field = _build_field(finger_rng, size, ridge_period, n_minutiae)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(acq_index,)))
    theta = rng.uniform(-MAX_ACQ_ROTATION, MAX_ACQ_ROTATION)
    r = MAX_ACQ_SHIFT * math.sqrt(rng.uniform())
    ang = rng.uniform(0.0, math.tau)
    return _render(field, rng, size, theta,
                   (r * math.cos(ang), r * math.sin(ang)))


def build_synthetic_patchset(n_fingers: int, n_acquisitions: int,
                             size: int = 70, ridge_period: float = 8.0,
                             n_minutiae: int = 6, seed: int = 1234
                             ) -> dict[str, list[tuple[str, Image]]]:
    """Patch set in the harness layout: finger key -> [(acq id, image)]."""
    patches: dict[str, list[tuple[str, Image]]] = {}
    for i in range(n_fingers):
        finger_seed = int(np.random.SeedSequence(
            entropy=seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])
        acqs = [(f"a{j}", synthetic_acquisition(
            finger_seed, j, size, ridge_period, n_minutiae))
            for j in range(n_acquisitions)]
        patches[f"f{i:02d}"] = acqs
    return patches


def synthetic_raw_acquisition(seed: int, width: int = 152, height: int = 200,
                              ridge_period: float = 8.0, n_minutiae: int = 8
                              ) -> Image:
    """Full sensor-frame acquisition: a finger-shaped ridge region over a
    light background, for exercising segmentation and patch extraction."""
    _check_params(min(width, height), ridge_period)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    field = _build_field(rng, min(width, height), ridge_period, n_minutiae)
    yy, xx = np.indices((height, width), dtype=np.float64)
    cx = width / 2.0 + rng.uniform(-8.0, 8.0)
    cy = height / 2.0 + rng.uniform(-8.0, 8.0)
    rx = 0.32 * width * rng.uniform(0.9, 1.1)
    ry = 0.36 * height * rng.uniform(0.9, 1.1)
    d = np.sqrt(((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2)
    envelope = np.clip((1.0 - d) / 0.08, 0.0, 1.0)
    background = 0.5 + CONTRAST
    img = background + envelope * (field.intensity(xx, yy) - background)
    img = img + rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    return Image(np.clip(img, 0.0, 1.0))
