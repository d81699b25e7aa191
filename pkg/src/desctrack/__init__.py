"""desctrack: a benchmark toolkit for local feature descriptors in
keypoint tracking.

Evaluates descriptors on three axes: matching distinctiveness against
ground-truth boxes, tracking accuracy via oriented-box overlap at several
precision requirements, and per-stage runtime (detect / extract / match).
Ships two reference extractors and a synthetic-sequence generator with
exact ground truth.
"""

__version__ = "0.1.0"

from .dataset import (
    Sequence,
    SynthesisConfig,
    generate_synthetic,
    load_sequence,
    make_preset,
    parse_ground_truth,
    save_sequence,
)
from .description import (
    BINARY,
    FLOAT,
    DescriptorExtractor,
    DescriptorSet,
    brief_steered_extract,
    get_extractor,
    grad_hist_extract,
)
from .detection import (
    DetectorConfig,
    Keypoint,
    build_pyramid,
    detect_multiscale,
    fast_detect,
    nonmax_suppress,
    orientation_intensity_centroid,
)
from .errors import DataError, GenerationError, GroundTruthError, SequenceError, TrackInitError
from .evaluation import (
    EvalConfig,
    FrameMatchStats,
    MatchLabel,
    correlation_matrix,
    frame_stats,
    label_matches,
    sequence_stats,
    success_rates,
)
from .geometry import (
    OrientedBox,
    Point2,
    SimilarityTransform,
    apply_transform,
    box_area,
    intersect_convex,
    overlap,
    point_in_box,
    transform_box,
)
from .matching import (
    MatcherConfig,
    MatchRecord,
    brute_force_match,
    filter_unambiguous,
    hamming_distance,
    l2_distance,
)
from .profiling import StageTiming, aggregate_timings, timed_run
from .report import (
    BenchmarkConfig,
    BenchmarkReport,
    build_configs,
    emit_report,
    run_benchmark,
)
from .tracker import TrackerConfig, TrackState, estimate_pose, lk_track_points, run_sequence
