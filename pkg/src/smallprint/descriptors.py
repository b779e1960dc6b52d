"""Keypoint descriptors: oriented normalized intensity patches compared with
SSD, and gradient-orientation histograms compared with euclidean distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detect import Keypoint
from .errors import (DegenerateDescriptorError, ExtractionError,
                     ParameterError)
from .image import Image, gradient_arrays, sample_grid


@dataclass(frozen=True, eq=False)
class PatchDescriptor:
    """(2w+1)x(2w+1) intensity patch, zero mean and unit sample stddev."""

    values: np.ndarray
    w: int


@dataclass(frozen=True, eq=False)
class HistDescriptor:
    """Concatenated orientation histograms, unit euclidean norm."""

    values: np.ndarray


def _rotated_grid(kp: Keypoint, half: float, n: int, spacing: float
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Sample coordinates of an n x n grid rotated into the keypoint frame.

    The grid's +x axis points along the keypoint orientation, so content
    aligned with the dominant gradient lands on the patch x-axis.
    """
    offs = (np.arange(n) - half) * spacing
    bx, ax = np.meshgrid(offs, offs, indexing="ij")  # ax: x offset, bx: y
    ct, st = math.cos(kp.theta), math.sin(kp.theta)
    xs = kp.x + ct * ax - st * bx
    ys = kp.y + st * ax + ct * bx
    return xs, ys


def oriented_patch_descriptor(img: Image, kp: Keypoint, w: int = 7
                              ) -> PatchDescriptor:
    """Oriented intensity patch, centered and normalized.

    The (2w+1)^2 grid is sampled bilinearly on a lattice rotated by the
    keypoint orientation, then shifted to zero mean and scaled to unit
    (sample) standard deviation, which cancels affine intensity changes.
    """
    if w < 1:
        raise ParameterError(f"patch half-width must be >= 1, got {w}")
    n = 2 * w + 1
    xs, ys = _rotated_grid(kp, float(w), n, 1.0)
    if xs.min() < 0 or ys.min() < 0 or xs.max() > img.width - 1 \
            or ys.max() > img.height - 1:
        raise ExtractionError(
            f"patch footprint around ({kp.x:.1f}, {kp.y:.1f}) leaves the image")
    vals, _ = sample_grid(img.pixels, xs, ys)
    mu = float(vals.mean())
    sd = float(vals.std(ddof=1))
    if sd < 1e-6:
        raise DegenerateDescriptorError("patch has no intensity variation")
    return PatchDescriptor((vals - mu) / sd, w)


def ssd_distance(a: PatchDescriptor, b: PatchDescriptor) -> float:
    """Sum of squared elementwise differences."""
    if a.values.shape != b.values.shape:
        raise ParameterError(
            f"patch shapes differ: {a.values.shape} vs {b.values.shape}")
    d = a.values - b.values
    return float((d * d).sum())


GRID_CELLS = 4
ORI_BINS = 8
WINDOW = 16          # samples per axis
CLAMP = 0.2


def gradient_histogram_descriptor(img: Image, kp: Keypoint) -> HistDescriptor:
    """4x4-cell, 8-orientation-bin gradient histogram around the keypoint.

    Gradients are taken on the image smoothed to the keypoint scale, sampled
    on a 16x16 lattice (spacing = scale) rotated into the keypoint frame, and
    accumulated with trilinear binning under a Gaussian spatial weight of half
    the window width. The flattened vector is normalized, clamped at 0.2 and
    renormalized (repeating until the clamp holds).
    """
    half = (WINDOW - 1) / 2.0
    xs, ys = _rotated_grid(kp, half, WINDOW, kp.scale)
    if xs.min() < 0 or ys.min() < 0 or xs.max() > img.width - 1 \
            or ys.max() > img.height - 1:
        raise ExtractionError(
            f"histogram footprint around ({kp.x:.1f}, {kp.y:.1f}) "
            f"leaves the image")
    gx_f, gy_f = gradient_arrays(img.pixels, kp.scale)
    gx, _ = sample_grid(gx_f, xs, ys)
    gy, _ = sample_grid(gy_f, xs, ys)

    # rotate gradients into the keypoint frame
    ct, st = math.cos(kp.theta), math.sin(kp.theta)
    gpx = ct * gx + st * gy
    gpy = -st * gx + ct * gy
    mag = np.hypot(gpx, gpy)
    if mag.max() <= 0.0:
        raise DegenerateDescriptorError("window has no gradient signal")
    ori = np.arctan2(gpy, gpx)

    # bin coordinates: spatial cells 0..3 (+1 border), orientation 0..7
    ii, jj = np.meshgrid(np.arange(WINDOW), np.arange(WINDOW), indexing="ij")
    row = (ii + 0.5) / WINDOW * GRID_CELLS - 0.5
    col = (jj + 0.5) / WINDOW * GRID_CELLS - 0.5
    ob = (ori % math.tau) / math.tau * ORI_BINS
    sigma_w = WINDOW / 2.0
    weight = np.exp(-((ii - half) ** 2 + (jj - half) ** 2)
                    / (2.0 * sigma_w ** 2))
    contrib = (mag * weight).ravel()

    r0 = np.floor(row).astype(np.int64).ravel()
    c0 = np.floor(col).astype(np.int64).ravel()
    o0 = np.floor(ob).astype(np.int64).ravel() % ORI_BINS
    fr = row.ravel() - np.floor(row).ravel()
    fc = col.ravel() - np.floor(col).ravel()
    fo = ob.ravel() - np.floor(ob).ravel()

    hist = np.zeros((GRID_CELLS + 2, GRID_CELLS + 2, ORI_BINS))
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            for do, wo in ((0, 1.0 - fo), (1, fo)):
                np.add.at(hist,
                          (r0 + 1 + dr, c0 + 1 + dc, (o0 + do) % ORI_BINS),
                          contrib * wr * wc * wo)
    vec = hist[1:-1, 1:-1, :].ravel()

    norm = float(np.linalg.norm(vec))
    if norm <= 0.0:
        raise DegenerateDescriptorError("window has no gradient signal")
    vec = vec / norm
    for _ in range(32):
        if vec.max() <= CLAMP + 1e-12:
            break
        vec = np.minimum(vec, CLAMP)
        vec = vec / np.linalg.norm(vec)
    return HistDescriptor(vec)


def euclidean_distance(a: HistDescriptor, b: HistDescriptor) -> float:
    """L2 norm of the difference of two histogram descriptors."""
    if a.values.shape != b.values.shape:
        raise ParameterError(
            f"descriptor lengths differ: {a.values.shape} vs {b.values.shape}")
    return float(np.linalg.norm(a.values - b.values))


def stack_descriptors(descs) -> np.ndarray:
    """Flatten a list of descriptors into an (N, D) float64 matrix."""
    if not descs:
        return np.zeros((0, 0))
    return np.stack([d.values.ravel() for d in descs]).astype(np.float64)
