"""Authentication evaluation protocol: enrollment splits, exhaustive score
tables and FAR/FRR/ROC computation.

Terminology: a *genuine* attempt compares a candidate image against its own
finger's enrollment; every other (candidate, finger) cell of the score table
is an *impostor* attempt. FAR is the fraction of impostor attempts accepted
at a threshold, FRR the fraction of genuine attempts rejected.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .detect import DogConfig, HarrisConfig
from .errors import DegenerateInputError, ParameterError, ParseError
from .image import Image, rotate_image
from .matching import RansacConfig, prepare_features, score_from_features
from .zncc import ZnccConfig, correlation_surface

logger = logging.getLogger(__name__)

METHODS = ("zncc", "harris-ssd", "dog-hist")
METHOD_ALIASES = {"sift": "dog-hist"}


def canonical_method(name: str) -> str:
    """Resolve method aliases ('sift' -> 'dog-hist') to canonical names."""
    resolved = METHOD_ALIASES.get(name, name)
    if resolved not in METHODS:
        raise ParameterError(
            f"unknown method {name!r}; expected one of {METHODS} "
            f"or aliases {tuple(METHOD_ALIASES)}")
    return resolved


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(
        1, np.uint64)[0])


# ---------------------------------------------------------------------------
# enrollment split

@dataclass(frozen=True, eq=False)
class Split:
    """Per-finger enrollment images and the remaining candidates."""

    n_enroll: int
    rng_seed: int
    enrolled: dict[str, list[Image]]
    candidates: list[tuple[str, str, Image]]  # (finger_key, acq_id, image)


def split_enrollment(patches: dict[str, list[tuple[str, Image]]],
                     n_enroll: int, rng_seed: int) -> Split:
    """Choose ``n_enroll`` enrollment images per finger, uniformly at random
    without replacement; everything else becomes a candidate. Reproducible
    for a fixed seed."""
    if not patches:
        raise ParameterError("empty patch set")
    min_count = min(len(v) for v in patches.values())
    if n_enroll < 1 or n_enroll >= min_count:
        raise ParameterError(
            f"n_enroll must be in [1, {min_count - 1}] so every finger "
            f"keeps at least one candidate; got {n_enroll}")
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    enrolled: dict[str, list[Image]] = {}
    candidates: list[tuple[str, str, Image]] = []
    for finger in sorted(patches):
        acqs = patches[finger]
        chosen = set(rng.choice(len(acqs), size=n_enroll, replace=False).tolist())
        enrolled[finger] = [acqs[i][1] for i in sorted(chosen)]
        candidates.extend(
            (finger, acq_id, img)
            for i, (acq_id, img) in enumerate(acqs) if i not in chosen)
    return Split(n_enroll, rng_seed, enrolled, candidates)


# ---------------------------------------------------------------------------
# pairwise scorers

@dataclass(frozen=True)
class ZnccScorer:
    """Rotation-sweep correlation scorer; candidates are pre-rotated once."""

    cfg: ZnccConfig = ZnccConfig()

    method = "zncc"
    zero_score = 0.0

    def prepare_enrolled(self, img: Image) -> Image:
        return img

    def prepare_candidate(self, img: Image) -> list[Image]:
        return [rotate_image(img, math.radians(a))
                for a in self.cfg.angles_deg()]

    def score(self, enrolled: Image, candidate: list[Image],
              seed: int) -> float:
        best: float | None = None
        for rotated in candidate:
            try:
                surface = correlation_surface(
                    enrolled, rotated, self.cfg.min_overlap_fraction)
            except DegenerateInputError:
                continue
            gamma, _, _ = surface.max_valid()
            if best is None or gamma > best:
                best = gamma
        return self.zero_score if best is None else best


@dataclass(frozen=True)
class FeatureScorer:
    """Keypoint-pipeline scorer; features are extracted once per image."""

    pipeline: str
    ransac: RansacConfig = RansacConfig()
    harris: HarrisConfig = HarrisConfig()
    dog: DogConfig = DogConfig()
    patch_halfwidth: int = 7

    zero_score = 0.0

    @property
    def method(self) -> str:
        return self.pipeline

    def _prepare(self, img: Image):
        return prepare_features(img, self.pipeline, self.harris, self.dog,
                                self.patch_halfwidth)

    def prepare_enrolled(self, img: Image):
        return self._prepare(img)

    def prepare_candidate(self, img: Image):
        return self._prepare(img)

    def score(self, enrolled, candidate, seed: int) -> float:
        cfg = replace(self.ransac, rng_seed=seed)
        return float(score_from_features(enrolled, candidate, cfg).score)


def make_scorer(method: str, zncc: ZnccConfig = ZnccConfig(),
                ransac: RansacConfig = RansacConfig(),
                harris: HarrisConfig = HarrisConfig(),
                dog: DogConfig = DogConfig(),
                patch_halfwidth: int = 7):
    method = canonical_method(method)
    if method == "zncc":
        return ZnccScorer(zncc)
    return FeatureScorer(method, ransac, harris, dog, patch_halfwidth)


# ---------------------------------------------------------------------------
# score tables

@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Candidates x fingers similarity matrix with its provenance.

    Score scales differ between methods (correlations in [-1, 1] versus
    integer match counts), so tables carry the method tag and are never
    mixed."""

    scores: np.ndarray
    candidate_ids: list[str]
    labels: list[str]           # true finger per candidate row
    fingers: list[str]          # column order
    method: str
    config: dict | None = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise ParameterError("scores must be a 2-D matrix")
        if not np.all(np.isfinite(scores)):
            raise ParameterError("score table has non-finite entries")
        if scores.shape != (len(self.candidate_ids), len(self.fingers)):
            raise ParameterError("score matrix shape does not match labels")
        if len(self.labels) != len(self.candidate_ids):
            raise ParameterError("one true-finger label per candidate required")
        object.__setattr__(self, "scores", scores)


_AGGREGATES = {
    "max": np.max,
    "mean": np.mean,
    "median": np.median,
}

_WORKER_STATE: dict = {}


def _candidate_row(scorer, enrolled_preps: dict, fingers: list[str],
                   candidate_img: Image, ci: int, base_seed: int,
                   aggregate: str) -> np.ndarray:
    agg = _AGGREGATES[aggregate]
    prep_c = scorer.prepare_candidate(candidate_img)
    row = np.zeros(len(fingers))
    for fi, finger in enumerate(fingers):
        seed = derive_seed(base_seed, ci, fi)
        cell: list[float] = []
        for prep_e in enrolled_preps[finger]:
            try:
                cell.append(scorer.score(prep_e, prep_c, seed))
            except Exception:
                logger.warning("scorer %s failed on candidate %d vs %s; "
                               "using zero score", scorer.method, ci, finger,
                               exc_info=True)
                cell.append(scorer.zero_score)
        row[fi] = agg(cell)
    return row


def _pool_init(scorer, enrolled_preps, fingers, base_seed, aggregate):
    _WORKER_STATE.update(scorer=scorer, enrolled=enrolled_preps,
                         fingers=fingers, base_seed=base_seed,
                         aggregate=aggregate)


def _pool_row(args) -> tuple[int, np.ndarray]:
    ci, img = args
    st = _WORKER_STATE
    return ci, _candidate_row(st["scorer"], st["enrolled"], st["fingers"],
                              img, ci, st["base_seed"], st["aggregate"])


def score_table(split: Split, scorer, workers: int = 1,
                aggregate: str = "max", config: dict | None = None
                ) -> ScoreTable:
    """Exhaustive candidate x finger score table.

    Each cell aggregates the pairwise scores of the candidate against every
    enrolled image of that finger (maximum by default). Cells are independent
    and deterministic: the RANSAC seed for cell (ci, fi) derives from the
    split seed and the cell position, so worker count does not change the
    result. A scorer failure yields the method's zero score and a log entry.
    """
    if aggregate not in _AGGREGATES:
        raise ParameterError(f"aggregate must be one of {tuple(_AGGREGATES)}")
    if not split.candidates:
        raise ParameterError("split has no candidate images")
    fingers = sorted(split.enrolled)
    enrolled_preps = {f: [scorer.prepare_enrolled(img)
                          for img in split.enrolled[f]] for f in fingers}
    n = len(split.candidates)
    scores = np.zeros((n, len(fingers)))
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(
                max_workers=workers, initializer=_pool_init,
                initargs=(scorer, enrolled_preps, fingers, split.rng_seed,
                          aggregate)) as pool:
            jobs = ((ci, img) for ci, (_, _, img) in enumerate(split.candidates))
            for ci, row in pool.map(_pool_row, jobs,
                                    chunksize=max(1, n // (workers * 4))):
                scores[ci] = row
    else:
        for ci, (_, _, img) in enumerate(split.candidates):
            scores[ci] = _candidate_row(scorer, enrolled_preps, fingers,
                                        img, ci, split.rng_seed, aggregate)
    return ScoreTable(
        scores=scores,
        candidate_ids=[f"{finger}/{acq}" for finger, acq, _ in split.candidates],
        labels=[finger for finger, _, _ in split.candidates],
        fingers=fingers,
        method=scorer.method,
        config=config)


# ---------------------------------------------------------------------------
# ROC

@dataclass(frozen=True)
class RocPoint:
    threshold: float
    far: float
    frr: float
    genuine_count: int
    impostor_count: int


def genuine_impostor_scores(table: ScoreTable
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Split the table into genuine and impostor score populations."""
    col = {f: i for i, f in enumerate(table.fingers)}
    genuine, impostor = [], []
    for row, label in enumerate(table.labels):
        if label not in col:
            raise ParameterError(f"candidate label {label!r} has no "
                                 f"enrolled finger column")
        g = col[label]
        genuine.append(table.scores[row, g])
        impostor.extend(np.delete(table.scores[row], g))
    return np.asarray(genuine), np.asarray(impostor)


def compute_roc(table: ScoreTable,
                thresholds: list[float] | str = "auto") -> list[RocPoint]:
    """FAR/FRR at each threshold.

    An attempt is accepted when its score is >= the threshold, so FAR is the
    fraction of impostor scores at or above it and FRR the fraction of
    genuine scores below it. ``"auto"`` evaluates every distinct score plus
    -inf/+inf sentinels. Points are returned sorted by threshold ascending,
    which makes FAR non-increasing and FRR non-decreasing.
    """
    genuine, impostor = genuine_impostor_scores(table)
    if len(genuine) == 0:
        raise ParameterError("score table has no genuine attempts")
    if len(impostor) == 0:
        raise ParameterError("score table has no impostor attempts")
    if isinstance(thresholds, str):
        if thresholds != "auto":
            raise ParameterError(f"unknown threshold spec {thresholds!r}")
        taus = np.concatenate(
            [[-np.inf], np.unique(table.scores.ravel()), [np.inf]])
    else:
        taus = np.sort(np.asarray(thresholds, dtype=np.float64))
    points = []
    for tau in taus:
        far = float((impostor >= tau).mean())
        frr = float((genuine < tau).mean())
        points.append(RocPoint(float(tau), far, frr,
                               len(genuine), len(impostor)))
    return points


def frr_at_far(points: list[RocPoint], max_far: float) -> float:
    """Lowest FRR among operating points with FAR at or below ``max_far``."""
    eligible = [p.frr for p in points if p.far <= max_far]
    if not eligible:
        return 1.0
    return min(eligible)


# ---------------------------------------------------------------------------
# CSV I/O

def write_score_table(table: ScoreTable, csv_path, sidecar_path=None) -> None:
    """Score table CSV (6-decimal scores) plus an optional config sidecar."""
    from pathlib import Path
    import json

    csv_path = Path(csv_path)
    lines = ["candidate_id,true_finger," + ",".join(table.fingers)]
    for cid, label, row in zip(table.candidate_ids, table.labels,
                               table.scores):
        lines.append(f"{cid},{label}," + ",".join(f"{v:.6f}" for v in row))
    csv_path.write_text("\n".join(lines) + "\n")
    if sidecar_path is not None:
        doc = {"method": table.method, "config": table.config}
        Path(sidecar_path).write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_score_table(csv_path, method: str | None = None) -> ScoreTable:
    """Parse a score-table CSV; a sidecar named ``<table>.json`` supplies the
    method tag when present."""
    from pathlib import Path
    import json

    csv_path = Path(csv_path)
    text = csv_path.read_text()
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise ParseError(f"{csv_path}:1: empty score table")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "candidate_id" \
            or header[1] != "true_finger":
        raise ParseError(f"{csv_path}:1: expected header "
                         f"'candidate_id,true_finger,<fingers...>'")
    fingers = header[2:]
    ids, labels, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError(f"{csv_path}:{lineno}: expected "
                             f"{len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise ParseError(f"{csv_path}:{lineno}: {exc}") from exc
        ids.append(parts[0])
        labels.append(parts[1])
    if not rows:
        raise ParseError(f"{csv_path}:2: score table has no rows")
    sidecar = csv_path.with_suffix(".json")
    config = None
    if method is None and sidecar.is_file():
        doc = json.loads(sidecar.read_text())
        method = doc.get("method")
        config = doc.get("config")
    return ScoreTable(np.asarray(rows), ids, labels, fingers,
                      method or "unknown", config)


def write_roc_csv(points: list[RocPoint], path) -> None:
    from pathlib import Path

    lines = ["threshold,far,frr,genuine_count,impostor_count"]
    for p in points:
        lines.append(f"{p.threshold!r},{p.far!r},{p.frr!r},"
                     f"{p.genuine_count},{p.impostor_count}")
    Path(path).write_text("\n".join(lines) + "\n")
