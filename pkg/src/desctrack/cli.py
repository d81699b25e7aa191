"""Command-line entry point.

Subcommands:
  run      full benchmark over a dataset directory
  synth    generate a synthetic fixture sequence
  eval     overlap / success rates from saved box files
  profile  timing-only tracking run

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dataset import (
    PRESET_NAMES,
    generate_synthetic,
    make_preset,
    parse_box_rows,
    parse_ground_truth,
    save_sequence,
)
from .description import EXTRACTORS
from .errors import DataError
from .evaluation import EvalConfig, success_rates
from .geometry import overlap
from .report import (
    BenchmarkConfig,
    build_configs,
    discover_sequences,
    emit_report,
    parse_run_config,
    run_benchmark,
)

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _default_jobs() -> int:
    env = os.environ.get("DESCTRACK_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="desctrack",
                     description="Benchmark local feature descriptors for tracking.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[], help="run the full benchmark")
    run.add_argument("--dataset", required=True, help="sequence directory or directory of sequences")
    run.add_argument("--descriptor", required=True, choices=sorted(EXTRACTORS))
    run.add_argument("--config", help="run-config file (key=value, namespaced keys)")
    run.add_argument("--out", required=True, help="output directory for report files")
    run.add_argument("--format", choices=["json", "csv", "both"], default="both")
    run.add_argument("--jobs", type=int, default=None,
                     help="parallel sequences (default: DESCTRACK_JOBS or 1)")

    synth = sub.add_parser("synth", help="generate a synthetic fixture sequence")
    synth.add_argument("--preset", required=True, choices=PRESET_NAMES)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="sequence output directory")

    ev = sub.add_parser("eval", help="overlap and success rates from saved boxes")
    ev.add_argument("--pred", required=True, help="predicted boxes (8 values per row, nan row = lost)")
    ev.add_argument("--gt", required=True, help="ground-truth boxes (8 values per row)")

    profile = sub.add_parser("profile", help="timing-only tracking run")
    profile.add_argument("--dataset", required=True)
    profile.add_argument("--descriptor", required=True, choices=sorted(EXTRACTORS))
    profile.add_argument("--config", help="run-config file")
    profile.add_argument("--out", required=True)
    profile.add_argument("--jobs", type=int, default=1,
                         help="parallel sequences (default 1 for stable timings)")
    return parser


def _load_config(path: str | None) -> BenchmarkConfig:
    if path is None:
        return BenchmarkConfig()
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{p}: config file not found")
    return build_configs(parse_run_config(p.read_text()))


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    sequences = discover_sequences(args.dataset)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    report = run_benchmark(sequences, args.descriptor, cfg, jobs=jobs)
    written = emit_report(report, args.format, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_synth(args) -> int:
    cfg = make_preset(args.preset, args.seed)
    seq = generate_synthetic(cfg, name=f"{args.preset}-{args.seed}")
    save_sequence(seq, args.out)
    print(f"{args.out}: {len(seq)} frames ({args.preset}, seed {args.seed})")
    return 0


def _cmd_eval(args) -> int:
    pred_path, gt_path = Path(args.pred), Path(args.gt)
    for p in (pred_path, gt_path):
        if not p.is_file():
            raise DataError(f"{p}: file not found")
    pred = parse_box_rows(pred_path.read_text())
    gt = parse_ground_truth(gt_path.read_text())
    if len(pred) != len(gt):
        raise DataError(
            f"row count mismatch: {pred_path} has {len(pred)} rows, "
            f"{gt_path} has {len(gt)}"
        )
    overlaps = [0.0 if b is None else overlap(b, g) for b, g in zip(pred, gt)]
    rates = success_rates(overlaps, EvalConfig())
    doc = {
        "frames": len(overlaps),
        "mean_overlap": sum(overlaps) / len(overlaps),
        "lost_frames": sum(1 for b in pred if b is None),
        "success_rates": {f"{u:g}": v for u, v in rates.items()},
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_profile(args) -> int:
    cfg = _load_config(args.config)
    sequences = discover_sequences(args.dataset)
    report = run_benchmark(sequences, args.descriptor, cfg, jobs=args.jobs,
                           profile_only=True)
    written = emit_report(report, "json", args.out)
    for path in written:
        print(path)
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_EXIT
    handlers = {
        "run": _cmd_run,
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "profile": _cmd_profile,
    }
    try:
        return handlers[args.command](args)
    except DataError as exc:
        print(f"desctrack: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"desctrack: i/o error: {exc}", file=sys.stderr)
        return DATA_EXIT


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
