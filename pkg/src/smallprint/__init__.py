"""smallprint: fingerprint matching baselines for small imaging sensors.

Three pairwise similarity methods (direct ZNCC with a rotation sweep, a
Harris-corner/oriented-patch pipeline, and a DoG/gradient-histogram pipeline)
plus the full authentication evaluation harness: dataset ingestion,
foreground segmentation, sensor-sized patch extraction, enrollment splits,
exhaustive score tables and FAR/FRR/ROC curves.
"""

from .errors import (
    DatasetError,
    DegenerateDescriptorError,
    DegenerateInputError,
    ExtractionError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    SamplingError,
    SegmentationError,
    SmallprintError,
)
from .image import (
    GradientField,
    Image,
    gaussian_smooth,
    gradient,
    load_image,
    rotate_image,
    sample_bilinear,
    save_image,
)
from .zncc import (
    CorrelationSurface,
    ZnccConfig,
    ZnccScore,
    compiled_backend_available,
    correlation_surface,
    default_backend,
    zncc_score,
)
from .detect import (
    DogConfig,
    HarrisConfig,
    Keypoint,
    dog_keypoints,
    harris_keypoints,
    harris_response,
    keypoint_orientation,
)
from .descriptors import (
    HistDescriptor,
    PatchDescriptor,
    euclidean_distance,
    gradient_histogram_descriptor,
    oriented_patch_descriptor,
    ssd_distance,
)
from .matching import (
    FeatureScore,
    MatchPair,
    RansacConfig,
    RansacResult,
    RigidTransform,
    feature_score,
    fit_rigid_ransac,
    prepare_features,
    score_from_features,
    symmetric_nn_match,
)
from .dataset import (
    DatasetEntry,
    DatasetIndex,
    extract_center_patch,
    index_dataset,
    load_patchset,
    patch_side_mm,
    segment_foreground,
)
from .evaluation import (
    RocPoint,
    ScoreTable,
    Split,
    compute_roc,
    frr_at_far,
    make_scorer,
    score_table,
    split_enrollment,
)
from .synthetic import (
    Minutia,
    build_synthetic_patchset,
    generate_synthetic_finger,
    synthetic_acquisition,
    synthetic_raw_acquisition,
)
from .config import RunConfig, SyntheticSpec, canonical_json, load_config

__version__ = "0.1.0"
