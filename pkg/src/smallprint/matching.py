"""Descriptor matching and geometric verification: symmetric nearest-neighbor
linking, robust rigid-transform fitting with RANSAC, and the inlier-count
similarity score used by both feature pipelines.

The geometric model maps a candidate point onto its reference counterpart as
``p_e = R(theta) @ (p_c + t)`` with an in-plane rotation and a 2-D translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .descriptors import (HistDescriptor, gradient_histogram_descriptor,
                          oriented_patch_descriptor, ssd_distance,
                          stack_descriptors)
from .detect import (DogConfig, HarrisConfig, Keypoint, dog_keypoints,
                     harris_keypoints, wrap_angle)
from .errors import (DegenerateDescriptorError, ExtractionError,
                     InsufficientDataError, ParameterError)
from .image import Image

PIPELINES = ("harris-ssd", "dog-hist")


@dataclass(frozen=True)
class MatchPair:
    """A mutual-nearest-neighbor link between keypoint lists."""

    idx_e: int
    idx_c: int
    distance: float


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """In-plane rotation (radians, in (-pi, pi]) plus 2-D translation."""

    theta: float
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        t = np.array(self.t, dtype=np.float64).reshape(2)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map candidate points into the reference frame."""
        pts = np.asarray(points, dtype=np.float64) + self.t
        ct, st = math.cos(self.theta), math.sin(self.theta)
        return np.stack([ct * pts[..., 0] - st * pts[..., 1],
                         st * pts[..., 0] + ct * pts[..., 1]], axis=-1)


@dataclass(frozen=True)
class RansacConfig:
    epsilon: float = 3.0            # inlier radius in pixels
    iterations: int = 500
    min_matches: int = 4
    max_abs_theta: float = math.pi / 6.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ParameterError("epsilon must be > 0")
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")
        if self.min_matches < 2:
            raise ParameterError("min_matches must be >= 2")


@dataclass(frozen=True, eq=False)
class RansacResult:
    transform: RigidTransform | None
    inliers: np.ndarray  # indices into the input pair list; empty = no consensus


def distance_matrix(desc_e, desc_c, metric) -> np.ndarray:
    """Exhaustive pairwise distances, vectorized for the built-in metrics."""
    if not len(desc_e) or not len(desc_c):
        return np.zeros((len(desc_e), len(desc_c)))
    from .descriptors import euclidean_distance
    if metric in (ssd_distance, euclidean_distance):
        a = stack_descriptors(list(desc_e))
        b = stack_descriptors(list(desc_c))
        sq = squared_distances(a, b)
        return sq if metric is ssd_distance else np.sqrt(sq)
    out = np.zeros((len(desc_e), len(desc_c)))
    for i, da in enumerate(desc_e):
        for k, db in enumerate(desc_c):
            out[i, k] = metric(da, db)
    return out


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared euclidean distances between matrix rows."""
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] \
        - 2.0 * a @ b.T
    return np.maximum(sq, 0.0)


def symmetric_nn_match_from_matrix(dmat: np.ndarray) -> list[MatchPair]:
    """Mutual argmin pairs of a distance matrix, sorted by distance.

    Ties break toward the lowest index on both axes; the result is a partial
    bijection (each row and column index appears at most once).
    """
    if dmat.size == 0:
        return []
    best_c = np.argmin(dmat, axis=1)
    best_e = np.argmin(dmat, axis=0)
    pairs = [MatchPair(int(i), int(k), float(dmat[i, k]))
             for i, k in enumerate(best_c) if int(best_e[k]) == i]
    pairs.sort(key=lambda p: (p.distance, p.idx_e, p.idx_c))
    return pairs


def symmetric_nn_match(desc_e, desc_c, metric) -> list[MatchPair]:
    """Keep (i, k) iff k is i's nearest neighbor in C and vice versa."""
    if not len(desc_e) or not len(desc_c):
        return []
    return symmetric_nn_match_from_matrix(distance_matrix(desc_e, desc_c, metric))


def _procrustes_rigid(pts_e: np.ndarray, pts_c: np.ndarray
                      ) -> tuple[float, np.ndarray] | None:
    """Closed-form least-squares rigid alignment p_e ~ R(theta)(p_c + t)."""
    mu_e = pts_e.mean(axis=0)
    mu_c = pts_c.mean(axis=0)
    a = pts_e - mu_e
    b = pts_c - mu_c
    sxx = float((b * a).sum())
    sxy = float((b[:, 0] * a[:, 1] - b[:, 1] * a[:, 0]).sum())
    if sxx == 0.0 and sxy == 0.0:
        return None
    theta = math.atan2(sxy, sxx)
    ct, st = math.cos(-theta), math.sin(-theta)
    rot_mu_e = np.array([ct * mu_e[0] - st * mu_e[1],
                         st * mu_e[0] + ct * mu_e[1]])
    return theta, rot_mu_e - mu_c


def _sample_indices(seed: int, iterations: int, n: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic 2-point samples; iteration i uses words 2i, 2i+1 of the
    seed stream derived from the configured seed."""
    words = np.random.SeedSequence(seed).generate_state(
        2 * iterations, np.uint64)
    ia = (words[0::2] % np.uint64(n)).astype(np.int64)
    ib = (words[1::2] % np.uint64(n - 1)).astype(np.int64)
    ib = np.where(ib >= ia, ib + 1, ib)
    return ia, ib


def fit_rigid_ransac(pairs, cfg: RansacConfig = RansacConfig()) -> RansacResult:
    """RANSAC rigid fit over matched point pairs.

    Each iteration draws a 2-point minimal sample (a 2-D rigid transform is
    determined by two correspondences); candidates rotating more than
    ``max_abs_theta`` are discarded. Consensus is the number of pairs whose
    residual under the candidate is below ``epsilon``; ties break toward the
    lower inlier residual sum, then the earlier iteration. The winning
    consensus set is refit in closed form and the inliers are recomputed under
    the refit transform, so every reported inlier satisfies the epsilon bound
    under the returned transform.
    """
    pts_e = np.asarray([p[0] for p in pairs], dtype=np.float64)
    pts_c = np.asarray([p[1] for p in pairs], dtype=np.float64)
    n = len(pts_e)
    if n < cfg.min_matches:
        raise InsufficientDataError(
            f"need at least {cfg.min_matches} pairs, got {n}")

    ia, ib = _sample_indices(cfg.rng_seed, cfg.iterations, n)
    d_e = pts_e[ib] - pts_e[ia]
    d_c = pts_c[ib] - pts_c[ia]
    ok = (np.einsum("ij,ij->i", d_e, d_e) > 1e-18) \
        & (np.einsum("ij,ij->i", d_c, d_c) > 1e-18)
    ang = np.arctan2(d_e[:, 1], d_e[:, 0]) - np.arctan2(d_c[:, 1], d_c[:, 0])
    theta = np.arctan2(np.sin(ang), np.cos(ang))  # wrapped
    ok &= np.abs(theta) <= cfg.max_abs_theta

    ct, st = np.cos(theta), np.sin(theta)
    # t = R(-theta) @ p_e - p_c, evaluated at the sample midpoints
    mid_e = 0.5 * (pts_e[ia] + pts_e[ib])
    mid_c = 0.5 * (pts_c[ia] + pts_c[ib])
    tx = ct * mid_e[:, 0] + st * mid_e[:, 1] - mid_c[:, 0]
    ty = -st * mid_e[:, 0] + ct * mid_e[:, 1] - mid_c[:, 1]

    # residuals of every pair under every candidate
    qx = pts_c[None, :, 0] + tx[:, None]
    qy = pts_c[None, :, 1] + ty[:, None]
    rx = pts_e[None, :, 0] - (ct[:, None] * qx - st[:, None] * qy)
    ry = pts_e[None, :, 1] - (st[:, None] * qx + ct[:, None] * qy)
    resid = np.sqrt(rx * rx + ry * ry)
    inl = resid < cfg.epsilon
    counts = inl.sum(axis=1)
    counts[~ok] = 0
    if counts.max() < cfg.min_matches:
        return RansacResult(None, np.zeros(0, dtype=np.int64))
    resid_sum = np.where(inl, resid, 0.0).sum(axis=1)
    order = np.lexsort((np.arange(len(counts)), resid_sum, -counts))
    best = int(order[0])

    consensus = np.nonzero(inl[best])[0]
    fit = _procrustes_rigid(pts_e[consensus], pts_c[consensus])
    if fit is None:
        transform = RigidTransform(float(theta[best]),
                                   np.array([tx[best], ty[best]]))
    else:
        transform = RigidTransform(fit[0], fit[1])
    final_resid = np.linalg.norm(
        pts_e - transform.apply(pts_c), axis=1)
    final = np.nonzero(final_resid < cfg.epsilon)[0]
    return RansacResult(transform, final)


# ---------------------------------------------------------------------------
# pipeline composition

@dataclass(frozen=True, eq=False)
class Features:
    """Keypoints with stacked descriptor rows, ready for matching."""

    pipeline: str
    keypoints: list[Keypoint]
    points: np.ndarray        # (N, 2) x, y
    descriptors: np.ndarray   # (N, D)


@dataclass(frozen=True, eq=False)
class FeatureScore:
    """Inlier-count similarity with failure bookkeeping."""

    score: int
    reason: str | None = None
    transform: RigidTransform | None = None
    inliers: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    n_keypoints: tuple[int, int] = (0, 0)
    n_matches: int = 0


def prepare_features(img: Image, pipeline: str,
                     harris: HarrisConfig = HarrisConfig(),
                     dog: DogConfig = DogConfig(),
                     patch_halfwidth: int = 7) -> Features:
    """Detect keypoints and compute descriptors, dropping keypoints whose
    descriptor footprint leaves the image (frequent on small patches)."""
    if pipeline == "harris-ssd":
        kps = harris_keypoints(img, harris)
        extract = lambda kp: oriented_patch_descriptor(img, kp, patch_halfwidth)
    elif pipeline == "dog-hist":
        kps = dog_keypoints(img, dog)
        extract = lambda kp: gradient_histogram_descriptor(img, kp)
    else:
        raise ParameterError(
            f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    kept: list[Keypoint] = []
    descs = []
    for kp in kps:
        try:
            descs.append(extract(kp))
        except (ExtractionError, DegenerateDescriptorError):
            continue
        kept.append(kp)
    pts = np.asarray([[kp.x, kp.y] for kp in kept], dtype=np.float64) \
        if kept else np.zeros((0, 2))
    return Features(pipeline, kept, pts, stack_descriptors(descs))


def score_from_features(fe: Features, fc: Features,
                        cfg: RansacConfig = RansacConfig()) -> FeatureScore:
    """Symmetric NN matching + RANSAC filtering; score = inlier count."""
    nk = (len(fe.keypoints), len(fc.keypoints))
    if nk[0] == 0 or nk[1] == 0:
        return FeatureScore(0, "no-keypoints", n_keypoints=nk)
    sq = squared_distances(fe.descriptors, fc.descriptors)
    dmat = sq if fe.pipeline == "harris-ssd" else np.sqrt(sq)
    pairs = symmetric_nn_match_from_matrix(dmat)
    if len(pairs) < cfg.min_matches:
        return FeatureScore(0, "no-matches", n_keypoints=nk,
                            n_matches=len(pairs))
    pt_pairs = [(fe.points[p.idx_e], fc.points[p.idx_c]) for p in pairs]
    result = fit_rigid_ransac(pt_pairs, cfg)
    if result.transform is None or len(result.inliers) == 0:
        return FeatureScore(0, "no-consensus", n_keypoints=nk,
                            n_matches=len(pairs))
    return FeatureScore(len(result.inliers), None, result.transform,
                        result.inliers, nk, len(pairs))


def feature_score(e: Image, c: Image, pipeline: str,
                  cfg: RansacConfig = RansacConfig(),
                  harris: HarrisConfig = HarrisConfig(),
                  dog: DogConfig = DogConfig(),
                  patch_halfwidth: int = 7) -> FeatureScore:
    """End-to-end feature-pipeline similarity between two images.

    All failure modes collapse to score 0 with a reason code: ``no-keypoints``
    (either side has none left after descriptor extraction), ``no-matches``
    (fewer symmetric links than the RANSAC minimum) or ``no-consensus``.
    """
    fe = prepare_features(e, pipeline, harris, dog, patch_halfwidth)
    fc = prepare_features(c, pipeline, harris, dog, patch_halfwidth)
    return score_from_features(fe, fc, cfg)
