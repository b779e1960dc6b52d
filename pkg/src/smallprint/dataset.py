"""Dataset ingestion and small-sensor patch simulation.

Expected directory layout: ``root/<person_id>/<finger_id>/<acquisition>.png``
(or ``.pgm``). A finger's identity is the (person, finger) pair; acquisitions
of the same finger are the genuine attempts against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, ExtractionError, SegmentationError
from .image import Image, load_image

IMAGE_SUFFIXES = (".png", ".pgm")


@dataclass(frozen=True)
class DatasetEntry:
    person_id: str
    finger_id: str
    acquisition_id: str
    path: Path

    @property
    def finger_key(self) -> str:
        return f"{self.person_id}/{self.finger_id}"


@dataclass(frozen=True, eq=False)
class DatasetIndex:
    """Deterministic lexicographic index of a dataset tree."""

    root: Path
    entries: list[DatasetEntry]
    errors: list[tuple[Path, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def by_finger(self) -> dict[str, list[DatasetEntry]]:
        out: dict[str, list[DatasetEntry]] = {}
        for entry in self.entries:
            out.setdefault(entry.finger_key, []).append(entry)
        return out

    def acquisition_counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.by_finger().items()}


def index_dataset(root: str | Path, skip_bad: bool = False,
                  validate: bool = True) -> DatasetIndex:
    """Scan ``root/person/finger/*.png|pgm`` into a sorted index.

    With ``validate`` every file must load as 8-bit grayscale; failures are
    collected into the index's error report and, unless ``skip_bad`` is set,
    abort the run with a :class:`DatasetError`.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    entries: list[DatasetEntry] = []
    errors: list[tuple[Path, str]] = []
    for person_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for finger_dir in sorted(p for p in person_dir.iterdir() if p.is_dir()):
            for path in sorted(finger_dir.iterdir()):
                if path.suffix.lower() not in IMAGE_SUFFIXES or not path.is_file():
                    continue
                if validate:
                    try:
                        load_image(path)
                    except DatasetError as exc:
                        errors.append((path, str(exc)))
                        continue
                entries.append(DatasetEntry(
                    person_dir.name, finger_dir.name, path.stem, path))
    if errors and not skip_bad:
        listing = "\n".join(f"  {p}: {msg}" for p, msg in errors)
        raise DatasetError(
            f"{len(errors)} file(s) failed to load under {root}:\n{listing}")
    return DatasetIndex(root, entries, errors)


def segment_foreground(img: Image, foreground: str = "dark") -> np.ndarray:
    """Two-cluster k-means on raw intensities; returns the foreground mask.

    Centroids start at the intensity extremes and iterate to convergence
    (tolerance 1e-6, at most 100 iterations), which makes the segmentation
    deterministic. Ridges are dark on capacitive sensors, so the darker
    cluster is the default foreground; pass ``foreground="light"`` for the
    opposite polarity.
    """
    if foreground not in ("dark", "light"):
        raise SegmentationError(f"foreground must be 'dark' or 'light', "
                                f"got {foreground!r}")
    vals = img.pixels.ravel()
    c0, c1 = float(vals.min()), float(vals.max())
    if c1 - c0 < 1e-12:
        raise SegmentationError("cannot segment a constant image")
    for _ in range(100):
        # assign to the nearer centroid; ties go to the lower cluster
        to_c1 = np.abs(vals - c1) < np.abs(vals - c0)
        n0 = float(vals[~to_c1].mean()) if (~to_c1).any() else c0
        n1 = float(vals[to_c1].mean()) if to_c1.any() else c1
        if abs(n0 - c0) + abs(n1 - c1) < 1e-6:
            c0, c1 = n0, n1
            break
        c0, c1 = n0, n1
    dark_is_c0 = c0 <= c1
    pick_dark = foreground == "dark"
    to_c1 = np.abs(vals - c1) < np.abs(vals - c0)
    in_c0 = ~to_c1
    mask = in_c0 if (dark_is_c0 == pick_dark) else to_c1
    return mask.reshape(img.shape)


def segment_centroids(img: Image) -> tuple[float, float]:
    """The two converged k-means centroids, sorted ascending."""
    mask = segment_foreground(img)  # runs the same iteration
    fg = img.pixels[mask]
    bg = img.pixels[~mask]
    a = float(fg.mean()) if fg.size else float("nan")
    b = float(bg.mean()) if bg.size else float("nan")
    return tuple(sorted((a, b)))


def extract_center_patch(img: Image, mask: np.ndarray, size: int = 70) -> Image:
    """Square patch centered on the foreground's bounding-box center.

    The window is clamped so it always stays inside the image; the image must
    be at least ``size`` pixels on each axis and the mask non-empty.
    """
    h, w = img.shape
    if h < size or w < size:
        raise ExtractionError(
            f"image {w}x{h} smaller than the {size}x{size} patch")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape:
        raise ExtractionError(f"mask shape {mask.shape} != image {img.shape}")
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        raise ExtractionError("empty foreground mask")
    cx = (xs.min() + xs.max()) / 2.0
    cy = (ys.min() + ys.max()) / 2.0
    sx = int(np.floor(cx - (size - 1) / 2.0 + 0.5))
    sy = int(np.floor(cy - (size - 1) / 2.0 + 0.5))
    sx = min(max(sx, 0), w - size)
    sy = min(max(sy, 0), h - size)
    return Image(img.pixels[sy:sy + size, sx:sx + size])


def patch_side_mm(size_px: int, dpi: float) -> float:
    """Physical side length simulated by a patch at the sensor resolution."""
    return size_px / dpi * 25.4


def load_patchset(index: DatasetIndex
                  ) -> dict[str, list[tuple[str, Image]]]:
    """Load every indexed file, grouped per finger in acquisition order."""
    out: dict[str, list[tuple[str, Image]]] = {}
    for entry in index.entries:
        out.setdefault(entry.finger_key, []).append(
            (entry.acquisition_id, load_image(entry.path)))
    return out
