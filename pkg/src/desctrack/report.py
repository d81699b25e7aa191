"""Benchmark orchestration: per-sequence evaluation, report assembly,
and JSON/CSV emission.

The JSON report is schema-versioned as ``desctrack-report/1``. All real
values are emitted with 6 significant digits; identical inputs and seeds
reproduce identical reports except for the timing fields.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .dataset import Sequence, load_sequence
from .description import DescriptorExtractor, get_extractor
from .detection import DetectorConfig
from .errors import DataError, TrackInitError
from .evaluation import (
    CorrelationResult,
    EvalConfig,
    FrameMatchStats,
    SequenceAggregate,
    correlation_matrix,
    frame_stats,
    label_matches,
    sequence_stats,
    success_rates,
)
from .geometry import overlap
from .matching import MatcherConfig, brute_force_match
from .profiling import StageTiming, TimingAggregate, aggregate_timings, timed_run
from .tracker import TrackerConfig

SCHEMA_VERSION = "desctrack-report/1"

_NAMESPACES = {
    "detector": DetectorConfig,
    "matcher": MatcherConfig,
    "tracker": TrackerConfig,
    "eval": EvalConfig,
}


@dataclass
class BenchmarkConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


def parse_run_config(text: str) -> dict[str, str]:
    """Flat key=value run-config lines, '#' comments allowed."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"run config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(value: str, target_type, key: str):
    try:
        if target_type is int:
            return int(value)
        if target_type is float:
            return float(value)
        if target_type is bool:
            lowered = value.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(value)
        # tuple-of-floats fields (eval.upsilon_levels)
        return tuple(float(v) for v in value.replace(",", " ").split())
    except ValueError:
        raise DataError(f"run config: cannot parse {key}={value!r}") from None


def build_configs(overrides: dict[str, str]) -> BenchmarkConfig:
    """Apply namespaced overrides (e.g. detector.max_features=2500) to the
    default configs. Value types follow each field's default.
    """
    cfg = BenchmarkConfig()
    known = {ns: {f.name for f in dataclasses.fields(klass)}
             for ns, klass in _NAMESPACES.items()}
    for key, value in overrides.items():
        ns, _, name = key.partition(".")
        if ns not in known or name not in known[ns]:
            raise DataError(f"run config: unknown key {key!r}")
        current = getattr(cfg, ns)
        default = getattr(current, name)
        if isinstance(default, bool):
            target = bool
        elif isinstance(default, int):
            target = int
        elif isinstance(default, float):
            target = float
        else:
            target = tuple
        try:
            updated = dataclasses.replace(current, **{name: _coerce(value, target, key)})
        except ValueError as exc:
            raise DataError(f"run config: {key}={value!r}: {exc}") from None
        setattr(cfg, ns, updated)
    return cfg


# ---------------------------------------------------------------------------
# Per-sequence evaluation
# ---------------------------------------------------------------------------

@dataclass
class SequenceResult:
    name: str
    frames: int
    untrackable: bool = False
    match_stats: list[FrameMatchStats] = field(default_factory=list)
    aggregate: Optional[SequenceAggregate] = None
    overlaps: list[float] = field(default_factory=list)  # frames 2..n
    lost_flags: list[bool] = field(default_factory=list)
    success: dict[float, float] = field(default_factory=dict)
    timings: list[StageTiming] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def evaluate_sequence(seq: Sequence, extractor: DescriptorExtractor,
                      cfg: BenchmarkConfig, profile_only: bool = False) -> SequenceResult:
    """Distinctiveness matching stats plus a timed tracking run.

    A failed tracker initialization marks the sequence untrackable; the
    matching statistics are still computed.
    """
    result = SequenceResult(name=seq.name, frames=len(seq))

    if not profile_only:
        first = extractor.detect_and_extract(seq.frames[0])
        b1 = seq.ground_truth[0]
        for t in range(2, len(seq) + 1):
            current = extractor.detect_and_extract(seq.frames[t - 1])
            matches = brute_force_match(first, current, cfg.matcher)
            labels = label_matches(matches, first.keypoints, current.keypoints,
                                   b1, seq.ground_truth[t - 1])
            result.match_stats.append(
                frame_stats(labels, matches, current.keypoints,
                            seq.ground_truth[t - 1], frame=t))
        result.aggregate = sequence_stats(result.match_stats)

    try:
        boxes, timings = timed_run(seq, extractor, cfg.tracker, cfg.matcher)
    except TrackInitError as exc:
        result.untrackable = True
        result.notes.append(f"untrackable: {exc}")
        return result
    result.timings = timings
    for box, gt in zip(boxes, seq.ground_truth[1:]):
        result.lost_flags.append(box is None)
        result.overlaps.append(0.0 if box is None else overlap(box, gt))
    result.success = success_rates(result.overlaps, cfg.eval)
    return result


_CORRELATION_MEASURES = (
    "mean_total_keypoints",
    "mean_object_keypoints",
    "mean_tp_ratio",
    "mean_fp_ratio",
    "mean_ttp_ratio",
)


def _collect_correlations(results: list[SequenceResult],
                          cfg: BenchmarkConfig) -> Optional[CorrelationResult]:
    usable = [r for r in results if not r.untrackable and r.aggregate is not None]
    if len(usable) < 2:
        return None
    measures: dict[str, list[float]] = {}
    for name in _CORRELATION_MEASURES:
        measures[name] = [getattr(r.aggregate, name) for r in usable]
    for u in cfg.eval.upsilon_levels:
        measures[f"success@{u:g}"] = [r.success[u] for r in usable]
    return correlation_matrix(measures)


@dataclass
class BenchmarkReport:
    descriptor: str
    config: BenchmarkConfig
    sequences: list[SequenceResult]
    timing_aggregates: list[TimingAggregate]
    correlations: Optional[CorrelationResult]
    jobs: int
    notes: list[str] = field(default_factory=list)
    schema: str = SCHEMA_VERSION


def run_benchmark(sequences: list[Sequence], descriptor: str,
                  cfg: Optional[BenchmarkConfig] = None, jobs: int = 1,
                  profile_only: bool = False) -> BenchmarkReport:
    """Evaluate every sequence with one descriptor and assemble the report."""
    if not sequences:
        raise DataError("no sequences to benchmark")
    cfg = cfg or BenchmarkConfig()
    extractor = get_extractor(descriptor, cfg.detector)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda s: evaluate_sequence(s, extractor, cfg, profile_only),
                sequences))
    else:
        results = [evaluate_sequence(s, extractor, cfg, profile_only)
                   for s in sequences]
    all_timings = [t for r in results for t in r.timings]
    correlations = None if profile_only else _collect_correlations(results, cfg)
    notes = []
    if correlations is None and not profile_only:
        notes.append("correlations omitted: fewer than 2 trackable sequences")
    return BenchmarkReport(
        descriptor=descriptor,
        config=cfg,
        sequences=results,
        timing_aggregates=aggregate_timings(all_timings),
        correlations=correlations,
        jobs=jobs,
        notes=notes,
    )


def discover_sequences(root) -> list[Sequence]:
    """Load a single sequence directory or every sequence subdirectory."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    if (root / "groundtruth.txt").is_file():
        return [load_sequence(root)]
    dirs = sorted(p for p in root.iterdir()
                  if p.is_dir() and (p / "groundtruth.txt").is_file())
    if not dirs:
        raise DataError(f"{root}: no sequence directories with groundtruth.txt")
    return [load_sequence(d) for d in dirs]


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _sig6(x: float) -> float:
    if x is None or not math.isfinite(x):
        return x
    return float(f"{x:.6g}")


def report_to_dict(report: BenchmarkReport) -> dict:
    cfg = report.config
    doc = {
        "schema": report.schema,
        "descriptor": report.descriptor,
        "version": __version__,
        "config": {
            "detector": dataclasses.asdict(cfg.detector),
            "matcher": dataclasses.asdict(cfg.matcher),
            "tracker": dataclasses.asdict(cfg.tracker),
            "eval": {"upsilon_levels": list(cfg.eval.upsilon_levels)},
            "jobs": report.jobs,
            "cpu_count": os.cpu_count(),
        },
        "sequences": [],
        "timing_aggregates": [],
        "correlations": None,
        "notes": list(report.notes),
    }
    doc["config"]["detector"]["pyramid_scale"] = _sig6(cfg.detector.pyramid_scale)
    for r in report.sequences:
        entry = {
            "name": r.name,
            "frames": r.frames,
            "untrackable": r.untrackable,
            "match_stats": [dataclasses.asdict(s) for s in r.match_stats],
            "aggregate": None,
            "overlaps": [
                {"frame": i + 2, "overlap": _sig6(v), "lost": bool(lost)}
                for i, (v, lost) in enumerate(zip(r.overlaps, r.lost_flags))
            ],
            "success_rates": {f"{u:g}": _sig6(v) for u, v in r.success.items()},
            "timings": [
                {
                    "frame": t.frame,
                    "width": t.resolution[0],
                    "height": t.resolution[1],
                    "keypoint_count": t.keypoint_count,
                    "detect_ms": _sig6(t.detect_ms),
                    "extract_ms": _sig6(t.extract_ms),
                    "match_ms": _sig6(t.match_ms),
                    "track_ms": _sig6(t.track_ms),
                    "total_ms": _sig6(t.total_ms),
                }
                for t in r.timings
            ],
            "notes": list(r.notes),
        }
        if r.aggregate is not None:
            entry["aggregate"] = {
                k: _sig6(v) if isinstance(v, float) else v
                for k, v in dataclasses.asdict(r.aggregate).items()
            }
        doc["sequences"].append(entry)
    for agg in report.timing_aggregates:
        doc["timing_aggregates"].append({
            "width": agg.resolution[0],
            "height": agg.resolution[1],
            "count": agg.count,
            "stages": {
                stage: {
                    "mean": _sig6(s.mean),
                    "variance": _sig6(s.variance),
                    "min": _sig6(s.min),
                    "max": _sig6(s.max),
                }
                for stage, s in agg.stages.items()
            },
        })
    if report.correlations is not None:
        doc["correlations"] = {
            "names": list(report.correlations.names),
            "matrix": [[_sig6(v) for v in row] for row in report.correlations.matrix.tolist()],
            "degenerate": list(report.correlations.degenerate),
        }
    return doc


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_report(report: BenchmarkReport, fmt: str, out_dir) -> list[Path]:
    """Write the report as report.json and/or one CSV per table.

    `fmt` is "json", "csv", or "both". Raises before creating any file when
    the report has no sequences.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown report format {fmt!r}")
    if not report.sequences:
        raise DataError("refusing to emit a report with no sequences")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if fmt in ("json", "both"):
        path = out_dir / "report.json"
        path.write_text(json.dumps(report_to_dict(report), indent=2) + "\n")
        written.append(path)

    if fmt in ("csv", "both"):
        d = report.descriptor
        stats_rows = [
            [d, r.name, s.frame, s.tp, s.fp, s.fn, s.unlabeled, s.ttp,
             s.total_keypoints, s.object_keypoints]
            for r in report.sequences for s in r.match_stats
        ]
        path = out_dir / "match_stats.csv"
        _write_csv(path, ["descriptor", "sequence", "frame", "tp", "fp", "fn",
                          "unlabeled", "ttp", "total_keypoints", "object_keypoints"],
                   stats_rows)
        written.append(path)

        overlap_rows = [
            [d, r.name, i + 2, v, lost]
            for r in report.sequences
            for i, (v, lost) in enumerate(zip(r.overlaps, r.lost_flags))
        ]
        path = out_dir / "overlaps.csv"
        _write_csv(path, ["descriptor", "sequence", "frame", "overlap", "lost"],
                   overlap_rows)
        written.append(path)

        success_rows = [
            [d, r.name, u, frac]
            for r in report.sequences for u, frac in r.success.items()
        ]
        path = out_dir / "success_rates.csv"
        _write_csv(path, ["descriptor", "sequence", "upsilon", "fraction"], success_rows)
        written.append(path)

        timing_rows = [
            [d, r.name, t.frame, t.resolution[0], t.resolution[1], t.keypoint_count,
             t.detect_ms, t.extract_ms, t.match_ms, t.track_ms, t.total_ms]
            for r in report.sequences for t in r.timings
        ]
        path = out_dir / "timings.csv"
        _write_csv(path, ["descriptor", "sequence", "frame", "width", "height",
                          "keypoint_count", "detect_ms", "extract_ms", "match_ms",
                          "track_ms", "total_ms"], timing_rows)
        written.append(path)

        corr_rows = []
        header = ["descriptor", "measure"]
        if report.correlations is not None:
            header += report.correlations.names
            for i, name in enumerate(report.correlations.names):
                corr_rows.append([d, name] + list(report.correlations.matrix[i]))
        path = out_dir / "correlations.csv"
        _write_csv(path, header, corr_rows)
        written.append(path)

    return written
