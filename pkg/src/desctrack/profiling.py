"""Stage-level wall-clock timing for tracker runs.

Stages mirror the tracking-by-detection pipeline: detect, extract, match,
plus `track` for optical flow and pose. Totals wrap the whole step, so
total >= detect + extract + match by construction.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import Sequence
from .description import DescriptorExtractor
from .geometry import OrientedBox
from .matching import MatcherConfig
from .tracker import TrackerConfig, init, step

STAGES = ("detect", "extract", "match", "track", "total")


@dataclass(frozen=True)
class StageTiming:
    frame: int
    detect_ms: float
    extract_ms: float
    match_ms: float
    track_ms: float
    total_ms: float
    keypoint_count: int
    resolution: tuple[int, int]  # (width, height)

    def __post_init__(self):
        values = (self.detect_ms, self.extract_ms, self.match_ms,
                  self.track_ms, self.total_ms)
        if any(v < 0 for v in values):
            raise ValueError("stage timings must be non-negative")
        if self.total_ms + 1e-6 < self.detect_ms + self.extract_ms + self.match_ms:
            raise ValueError("total_ms cannot be below the summed stages")

    def stage_ms(self, stage: str) -> float:
        return getattr(self, f"{stage}_ms")


class StageTimer:
    """Collects per-stage durations for one tracker step."""

    def __init__(self):
        self.durations: dict[str, float] = {}
        self.keypoint_count = 0

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.durations[name] = self.durations.get(name, 0.0) + elapsed

    def note_keypoints(self, count: int):
        self.keypoint_count = count

    def to_timing(self, frame: int, total_s: float, resolution: tuple[int, int]) -> StageTiming:
        ms = {name: self.durations.get(name, 0.0) * 1000.0 for name in STAGES}
        return StageTiming(
            frame=frame,
            detect_ms=ms["detect"],
            extract_ms=ms["extract"],
            match_ms=ms["match"],
            track_ms=ms["track"],
            total_ms=total_s * 1000.0,
            keypoint_count=self.keypoint_count,
            resolution=resolution,
        )


def timed_run(
    seq: Sequence,
    extractor: DescriptorExtractor,
    cfg: TrackerConfig = TrackerConfig(),
    matcher: MatcherConfig = MatcherConfig(),
) -> tuple[list[Optional[OrientedBox]], list[StageTiming]]:
    """run_sequence with per-frame stage timings (frames 2..n; the
    initialization frame is not timed).
    """
    state = init(seq.frames[0], seq.ground_truth[0], extractor, cfg)
    boxes: list[Optional[OrientedBox]] = []
    timings: list[StageTiming] = []
    for offset, frame in enumerate(seq.frames[1:], start=2):
        h, w = frame.shape
        timer = StageTimer()
        start = time.perf_counter()
        state, box = step(state, frame, extractor, cfg, matcher, timer=timer)
        total = time.perf_counter() - start
        boxes.append(box)
        timings.append(timer.to_timing(offset, total, (w, h)))
    return boxes, timings


@dataclass
class StageAggregate:
    mean: float
    variance: float  # unbiased sample variance; 0.0 when n == 1
    min: float
    max: float


@dataclass
class TimingAggregate:
    resolution: tuple[int, int]
    count: int
    stages: dict[str, StageAggregate] = field(default_factory=dict)


def aggregate_timings(timings: list[StageTiming]) -> list[TimingAggregate]:
    """Per-resolution mean/variance/min/max for every stage, resolutions
    in ascending order.
    """
    groups: dict[tuple[int, int], list[StageTiming]] = {}
    for t in timings:
        groups.setdefault(t.resolution, []).append(t)
    out = []
    for resolution in sorted(groups):
        members = groups[resolution]
        agg = TimingAggregate(resolution=resolution, count=len(members))
        for stage in STAGES:
            values = np.array([m.stage_ms(stage) for m in members])
            variance = float(values.var(ddof=1)) if len(values) > 1 else 0.0
            agg.stages[stage] = StageAggregate(
                mean=float(values.mean()),
                variance=variance,
                min=float(values.min()),
                max=float(values.max()),
            )
        out.append(agg)
    return out
