"""Match labeling against ground-truth boxes, distinctiveness aggregates,
overlap success rates, and measure correlation matrices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .detection import Keypoint
from .geometry import OrientedBox, point_in_box
from .matching import MatchRecord


class MatchLabel(enum.Enum):
    TRUE_POSITIVE = "tp"
    FALSE_POSITIVE = "fp"
    FALSE_NEGATIVE = "fn"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class EvalConfig:
    upsilon_levels: tuple[float, ...] = (0.25, 0.5, 0.75)

    def __post_init__(self):
        levels = tuple(self.upsilon_levels)
        if not levels or any(not 0.0 < u < 1.0 for u in levels):
            raise ValueError("upsilon levels must lie in (0, 1)")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("upsilon levels must be strictly increasing")
        object.__setattr__(self, "upsilon_levels", levels)


def label_matches(
    matches: Sequence[MatchRecord],
    k1: Sequence[Keypoint],
    kt: Sequence[Keypoint],
    b1: OrientedBox,
    bt: OrientedBox,
) -> list[MatchLabel]:
    """Label each match by whether its endpoints lie inside the object
    boxes of the first and the current frame.

    Matches whose endpoints are both outside (background-to-background)
    get an explicit UNLABELED so totals reconcile.
    """
    labels = []
    for m in matches:
        if not (0 <= m.query_idx < len(k1)) or not (0 <= m.train_idx < len(kt)):
            raise IndexError(
                f"match ({m.query_idx}, {m.train_idx}) out of range "
                f"({len(k1)} query, {len(kt)} train keypoints)"
            )
        in_first = point_in_box(k1[m.query_idx].position, b1)
        in_current = point_in_box(kt[m.train_idx].position, bt)
        if in_current and in_first:
            labels.append(MatchLabel.TRUE_POSITIVE)
        elif not in_current and in_first:
            labels.append(MatchLabel.FALSE_POSITIVE)
        elif in_current and not in_first:
            labels.append(MatchLabel.FALSE_NEGATIVE)
        else:
            labels.append(MatchLabel.UNLABELED)
    return labels


@dataclass
class FrameMatchStats:
    frame: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    unlabeled: int = 0
    ttp: int = 0  # true positives that also pass the ratio test
    total_keypoints: int = 0
    object_keypoints: int = 0

    def __post_init__(self):
        if self.ttp > self.tp:
            raise ValueError("ttp cannot exceed tp")


def frame_stats(
    labels: Sequence[MatchLabel],
    matches: Sequence[MatchRecord],
    keypoints: Sequence[Keypoint],
    box: OrientedBox,
    frame: int = 0,
) -> FrameMatchStats:
    """Count labels for one frame; `keypoints`/`box` are the current frame's."""
    if len(labels) != len(matches):
        raise ValueError("labels and matches must be parallel")
    stats = FrameMatchStats(frame=frame, total_keypoints=len(keypoints))
    for label, match in zip(labels, matches):
        if label is MatchLabel.TRUE_POSITIVE:
            stats.tp += 1
            if not match.ambiguous:
                stats.ttp += 1
        elif label is MatchLabel.FALSE_POSITIVE:
            stats.fp += 1
        elif label is MatchLabel.FALSE_NEGATIVE:
            stats.fn += 1
        else:
            stats.unlabeled += 1
    stats.object_keypoints = sum(
        1 for kp in keypoints if point_in_box(kp.position, box)
    )
    return stats


@dataclass
class SequenceAggregate:
    """Arithmetic means over frames; ratios use tp+fp+fn as denominator
    (0 when a frame has no labeled matches).
    """

    frames: int
    mean_tp: float
    mean_fp: float
    mean_fn: float
    mean_unlabeled: float
    mean_ttp: float
    mean_total_keypoints: float
    mean_object_keypoints: float
    mean_tp_ratio: float
    mean_fp_ratio: float
    mean_ttp_ratio: float


def sequence_stats(per_frame: Sequence[FrameMatchStats]) -> SequenceAggregate:
    if not per_frame:
        raise ValueError("no frame statistics to aggregate")

    def ratio(num: int, s: FrameMatchStats) -> float:
        denom = s.tp + s.fp + s.fn
        return num / denom if denom else 0.0

    n = len(per_frame)
    return SequenceAggregate(
        frames=n,
        mean_tp=sum(s.tp for s in per_frame) / n,
        mean_fp=sum(s.fp for s in per_frame) / n,
        mean_fn=sum(s.fn for s in per_frame) / n,
        mean_unlabeled=sum(s.unlabeled for s in per_frame) / n,
        mean_ttp=sum(s.ttp for s in per_frame) / n,
        mean_total_keypoints=sum(s.total_keypoints for s in per_frame) / n,
        mean_object_keypoints=sum(s.object_keypoints for s in per_frame) / n,
        mean_tp_ratio=sum(ratio(s.tp, s) for s in per_frame) / n,
        mean_fp_ratio=sum(ratio(s.fp, s) for s in per_frame) / n,
        mean_ttp_ratio=sum(ratio(s.ttp, s) for s in per_frame) / n,
    )


def success_rates(overlaps: Sequence[float], cfg: EvalConfig = EvalConfig()) -> dict[float, float]:
    """Fraction of overlaps strictly above each precision requirement."""
    if len(overlaps) == 0:
        raise ValueError("no overlap values")
    values = np.asarray(overlaps, dtype=np.float64)
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("overlap values must lie in [0, 1]")
    return {u: float(np.mean(values > u)) for u in cfg.upsilon_levels}


@dataclass
class CorrelationResult:
    names: list[str]
    matrix: np.ndarray  # (K, K) Pearson correlations
    degenerate: list[str]  # zero-variance measures (correlation forced to 0)


def correlation_matrix(measures: Mapping[str, Sequence[float]]) -> CorrelationResult:
    """Pearson correlations between named measure vectors.

    A zero-variance vector correlates 0 with everything (1 with itself)
    and is reported in `degenerate`.
    """
    names = list(measures)
    if not names:
        raise ValueError("no measures given")
    vectors = [np.asarray(measures[name], dtype=np.float64) for name in names]
    n = len(vectors[0])
    if n < 2:
        raise ValueError("measure vectors need at least 2 entries")
    for name, v in zip(names, vectors):
        if len(v) != n:
            raise ValueError(f"measure {name!r} has length {len(v)}, expected {n}")
    data = np.stack(vectors)
    centered = data - data.mean(axis=1, keepdims=True)
    std = np.sqrt((centered * centered).sum(axis=1))
    degenerate = [names[i] for i in range(len(names)) if std[i] == 0.0]
    safe = np.where(std == 0.0, 1.0, std)
    normed = centered / safe[:, None]
    matrix = normed @ normed.T
    matrix = (matrix + matrix.T) * 0.5  # force exact symmetry
    for i in range(len(names)):
        if std[i] == 0.0:
            matrix[i, :] = 0.0
            matrix[:, i] = 0.0
        matrix[i, i] = 1.0
    matrix = np.clip(matrix, -1.0, 1.0)
    return CorrelationResult(names=names, matrix=matrix, degenerate=degenerate)
