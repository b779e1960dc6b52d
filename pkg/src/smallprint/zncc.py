"""Direct-method similarity: zero-mean normalized cross-correlation over all
translations, maximized across a discrete rotation sweep.

For every offset (u, v) the support S is the set of pixels of the reference e
whose counterpart in the candidate c lands on a valid pixel. Means and the
(sum-of-squares) sigmas are recomputed over S for each offset, and

    gamma(u, v) = sum_S (e - mu_e) * (c - mu_c) / (sigma_e * sigma_c).

Offsets with too small a support or with zero variance on either side are
marked invalid. The heavy summation runs in a compiled kernel when available
(``smallprint._zncc_cy``), with a numpy/scipy fallback selected at import.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _zncc_py
from .errors import DegenerateInputError, ParameterError
from .image import Image, rotate_image

try:
    from . import _zncc_cy
except ImportError:  # extension not built: python backend only
    _zncc_cy = None

#: entries with a centered sum of squares at or below this are treated as
#: constant (sigma = 0) and marked invalid
VAR_TINY = 1e-12


def compiled_backend_available() -> bool:
    return _zncc_cy is not None


def default_backend() -> str:
    """Active backend name: 'compiled' or 'python'.

    The SMALLPRINT_ZNCC_BACKEND environment variable ('compiled'/'python')
    forces the choice.
    """
    forced = os.environ.get("SMALLPRINT_ZNCC_BACKEND")
    if forced:
        if forced not in ("compiled", "python"):
            raise ParameterError(
                f"SMALLPRINT_ZNCC_BACKEND must be 'compiled' or 'python', "
                f"got {forced!r}")
        if forced == "compiled" and _zncc_cy is None:
            raise ParameterError(
                "compiled backend requested but smallprint._zncc_cy is not built")
        return forced
    return "compiled" if _zncc_cy is not None else "python"


@dataclass(frozen=True)
class ZnccConfig:
    """Rotation sweep and support bounds for the correlation score."""

    rotation_min: float = -30.0   # degrees
    rotation_max: float = 30.0    # degrees
    rotation_step: float = 5.0    # degrees
    min_overlap_fraction: float = 0.25

    def __post_init__(self):
        if self.rotation_min > self.rotation_max:
            raise ParameterError("rotation_min must be <= rotation_max")
        if self.rotation_step <= 0:
            raise ParameterError("rotation_step must be > 0")
        if not (0.0 < self.min_overlap_fraction <= 1.0):
            raise ParameterError("min_overlap_fraction must be in (0, 1]")

    def angles_deg(self) -> list[float]:
        out = []
        a = self.rotation_min
        while a <= self.rotation_max + 1e-9:
            out.append(round(a, 9))
            a += self.rotation_step
        return out


@dataclass(frozen=True, eq=False)
class CorrelationSurface:
    """gamma(u, v) over all translations plus validity bookkeeping.

    ``values[iv, iu]`` is gamma at offset ``u = iu + u_range[0]``,
    ``v = iv + v_range[0]``; invalid entries hold NaN.
    """

    values: np.ndarray
    valid: np.ndarray
    overlap_counts: np.ndarray
    u_range: tuple[int, int]
    v_range: tuple[int, int]

    def offset(self, iu: int, iv: int) -> tuple[int, int]:
        return (iu + self.u_range[0], iv + self.v_range[0])

    def max_valid(self) -> tuple[float, int, int]:
        """(gamma, u, v) of the maximum over valid entries."""
        masked = np.where(self.valid, self.values, -np.inf)
        idx = int(np.argmax(masked))
        iv, iu = np.unravel_index(idx, masked.shape)
        if not self.valid[iv, iu]:
            raise DegenerateInputError("correlation surface has no valid entry")
        u, v = self.offset(int(iu), int(iv))
        return float(self.values[iv, iu]), u, v


@dataclass(frozen=True)
class ZnccScore:
    """Result of the rotation-sweep correlation score."""

    score: float
    best_angle_deg: float | None
    degenerate: bool = False


def _weights(img: Image) -> np.ndarray:
    if img.valid is None:
        return np.ones(img.shape, dtype=np.float64)
    return img.valid.astype(np.float64)


_EMPTY_RUNS = np.zeros(0, dtype=np.int64)


def _row_runs(img: Image) -> tuple[np.ndarray, np.ndarray]:
    """Per-row contiguous valid runs (lo, hi inclusive), if representable.

    Rotation masks are convex, so each row's valid pixels always form one run;
    arbitrary masks may not, in which case empty arrays are returned and the
    compiled kernel falls back to its general path.
    """
    h, w = img.shape
    if img.valid is None:
        return (np.zeros(h, dtype=np.int64),
                np.full(h, w - 1, dtype=np.int64))
    lo = np.full(h, 0, dtype=np.int64)
    hi = np.full(h, -1, dtype=np.int64)
    counts = img.valid.sum(axis=1)
    first = np.argmax(img.valid, axis=1)
    last = w - 1 - np.argmax(img.valid[:, ::-1], axis=1)
    nonempty = counts > 0
    contiguous = last[nonempty] - first[nonempty] + 1 == counts[nonempty]
    if not bool(contiguous.all()):
        return _EMPTY_RUNS, _EMPTY_RUNS
    lo[nonempty] = first[nonempty]
    hi[nonempty] = last[nonempty]
    return lo, hi


def correlation_surface(e: Image, c: Image,
                        min_overlap_fraction: float = 0.25,
                        backend: str | None = None) -> CorrelationSurface:
    """Masked ZNCC surface between reference e and candidate c.

    Entries whose support is smaller than ``min_overlap_fraction`` times the
    smaller image's pixel count, or whose support is constant on either side,
    are invalid. Raises :class:`DegenerateInputError` when no entry is valid.
    """
    if not (0.0 < min_overlap_fraction <= 1.0):
        raise ParameterError("min_overlap_fraction must be in (0, 1]")
    if e.pixels.size == 0 or c.pixels.size == 0:
        raise ParameterError("images must be non-empty")

    min_count = min_overlap_fraction * min(e.pixels.size, c.pixels.size)
    we = _weights(e)
    wc = _weights(c)
    name = backend or default_backend()
    if name == "compiled":
        if _zncc_cy is None:
            raise ParameterError("compiled backend is not built")
        xlo, xhi = _row_runs(c) if e.valid is None else (_EMPTY_RUNS, _EMPTY_RUNS)
        cnt, se, sc, see, scc, sec = _zncc_cy.surface_sums(
            e.pixels, we, c.pixels, wc, float(min_count),
            e.valid is None, xlo, xhi)
    elif name == "python":
        cnt, se, sc, see, scc, sec = _zncc_py.surface_sums(
            e.pixels, we, c.pixels, wc)
    else:
        raise ParameterError(f"unknown backend {name!r}")

    with np.errstate(divide="ignore", invalid="ignore"):
        num = sec - se * sc / cnt
        var_e = see - se * se / cnt
        var_c = scc - sc * sc / cnt
        valid = (cnt >= min_count) & (var_e > VAR_TINY) & (var_c > VAR_TINY)
        values = np.where(valid, num / np.sqrt(var_e * var_c), np.nan)

    counts = np.rint(cnt).astype(np.int64)
    me, ne = e.shape
    mc, nc = c.shape
    surface = CorrelationSurface(
        values=values, valid=valid, overlap_counts=counts,
        u_range=(-(nc - 1), ne - 1), v_range=(-(mc - 1), me - 1))
    if not valid.any():
        raise DegenerateInputError("correlation surface has no valid entry")
    return surface


def zncc_score(e: Image, c: Image, cfg: ZnccConfig = ZnccConfig(),
               backend: str | None = None) -> ZnccScore:
    """Maximum of the correlation surface over the rotation sweep.

    The candidate is rotated to each sweep angle; invalid pixels introduced by
    the rotation are excluded from every offset's statistics. When every angle
    is degenerate (e.g. a constant candidate) the score is 0 with the
    degenerate flag set.
    """
    best: float | None = None
    best_angle: float | None = None
    for angle in cfg.angles_deg():
        rotated = rotate_image(c, math.radians(angle))
        try:
            surface = correlation_surface(
                e, rotated, cfg.min_overlap_fraction, backend=backend)
        except DegenerateInputError:
            continue
        gamma, _, _ = surface.max_valid()
        if best is None or gamma > best:
            best, best_angle = gamma, angle
    if best is None:
        return ZnccScore(0.0, None, degenerate=True)
    return ZnccScore(best, best_angle, degenerate=False)
