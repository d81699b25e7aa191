import json

import numpy as np
import pytest

from desctrack.dataset import SynthesisConfig, generate_synthetic
from desctrack.errors import DataError
from desctrack.geometry import SimilarityTransform
from desctrack.report import (
    BenchmarkConfig,
    build_configs,
    discover_sequences,
    emit_report,
    parse_run_config,
    report_to_dict,
    run_benchmark,
)


def _tiny_seq(seed, name):
    cfg = SynthesisConfig(
        width=160, height=120, frame_count=6,
        motion=[SimilarityTransform(translation=(1.5 * t, 0.5 * t)) for t in range(6)],
        texture_seed=seed, noise_sigma=1.0,
        object_center=(70.0, 60.0), object_size=(60, 50),
    )
    return generate_synthetic(cfg, name=name)


@pytest.fixture(scope="module")
def two_seq_report():
    seqs = [_tiny_seq(1, "seq-a"), _tiny_seq(2, "seq-b")]
    cfg = BenchmarkConfig()
    return run_benchmark(seqs, "binary256", cfg)


class TestRunConfig:
    def test_parse_key_values(self):
        text = "# comment\ndetector.max_features = 500\nmatcher.rho=0.7\n"
        assert parse_run_config(text) == {
            "detector.max_features": "500", "matcher.rho": "0.7"}

    def test_malformed_line(self):
        with pytest.raises(DataError, match="line 1"):
            parse_run_config("not a key value")

    def test_build_applies_overrides(self):
        cfg = build_configs({
            "detector.max_features": "500",
            "detector.octaves": "2",
            "matcher.rho": "0.7",
            "matcher.cross_check": "true",
            "tracker.ransac_seed": "9",
            "eval.upsilon_levels": "0.3,0.6",
        })
        assert cfg.detector.max_features == 500
        assert cfg.detector.octaves == 2
        assert cfg.matcher.rho == 0.7
        assert cfg.matcher.cross_check is True
        assert cfg.tracker.ransac_seed == 9
        assert cfg.eval.upsilon_levels == (0.3, 0.6)

    def test_unknown_key(self):
        with pytest.raises(DataError, match="unknown key"):
            build_configs({"detector.bogus": "1"})

    def test_bad_value(self):
        with pytest.raises(DataError):
            build_configs({"detector.max_features": "many"})

    def test_invalid_config_value_wrapped(self):
        with pytest.raises(DataError):
            build_configs({"matcher.rho": "2.0"})


class TestRunBenchmark:
    def test_report_structure(self, two_seq_report):
        report = two_seq_report
        assert report.schema == "desctrack-report/1"
        assert len(report.sequences) == 2
        for r in report.sequences:
            assert not r.untrackable
            assert len(r.overlaps) == r.frames - 1
            assert len(r.timings) == r.frames - 1
            assert len(r.match_stats) == r.frames - 1
            assert set(r.success) == {0.25, 0.5, 0.75}
        assert report.correlations is not None

    def test_paper_parameter_defaults_in_snapshot(self, two_seq_report):
        doc = report_to_dict(two_seq_report)
        assert doc["config"]["detector"]["max_features"] == 2500
        assert doc["config"]["detector"]["octaves"] == 4

    def test_success_rates_monotone(self, two_seq_report):
        for r in two_seq_report.sequences:
            vals = [r.success[u] for u in sorted(r.success)]
            assert vals == sorted(vals, reverse=True)

    def test_correlation_matrix_well_formed(self, two_seq_report):
        m = two_seq_report.correlations.matrix
        assert np.array_equal(m, m.T)
        assert np.allclose(np.diag(m), 1.0)

    def test_single_sequence_omits_correlations(self):
        report = run_benchmark([_tiny_seq(3, "solo")], "binary256")
        assert report.correlations is None
        assert any("correlations omitted" in n for n in report.notes)

    def test_empty_sequences_error(self):
        with pytest.raises(DataError):
            run_benchmark([], "binary256")

    def test_jobs_parallel_matches_serial(self):
        seqs = [_tiny_seq(1, "seq-a"), _tiny_seq(2, "seq-b")]
        serial = run_benchmark(seqs, "binary256", jobs=1)
        parallel = run_benchmark(seqs, "binary256", jobs=2)
        a = report_to_dict(serial)
        b = report_to_dict(parallel)
        for doc in (a, b):
            doc["config"]["jobs"] = 0
            for s in doc["sequences"]:
                for t in s["timings"]:
                    for k in ("detect_ms", "extract_ms", "match_ms", "track_ms", "total_ms"):
                        t[k] = 0.0
            doc["timing_aggregates"] = []
        assert a == b


class TestEmitReport:
    def test_json_round_trip_structural(self, two_seq_report, tmp_path):
        emit_report(two_seq_report, "json", tmp_path)
        loaded = json.loads((tmp_path / "report.json").read_text())
        direct = report_to_dict(two_seq_report)
        direct = json.loads(json.dumps(direct))  # normalize tuples etc.
        assert loaded == direct

    def test_csv_files_and_headers(self, two_seq_report, tmp_path):
        written = emit_report(two_seq_report, "csv", tmp_path)
        names = {p.name for p in written}
        assert names == {"match_stats.csv", "overlaps.csv", "success_rates.csv",
                         "timings.csv", "correlations.csv"}
        header = (tmp_path / "success_rates.csv").read_text().splitlines()[0]
        assert header == "descriptor,sequence,upsilon,fraction"

    def test_both_formats(self, two_seq_report, tmp_path):
        written = emit_report(two_seq_report, "both", tmp_path)
        assert len(written) == 6

    def test_every_frame_once_in_tables(self, two_seq_report, tmp_path):
        emit_report(two_seq_report, "csv", tmp_path)
        for table in ("overlaps.csv", "timings.csv"):
            rows = (tmp_path / table).read_text().splitlines()[1:]
            seen = set()
            for row in rows:
                fields = row.split(",")
                key = (fields[1], fields[2])  # (sequence, frame)
                assert key not in seen
                seen.add(key)
            expected = {(r.name, str(f)) for r in two_seq_report.sequences
                        for f in range(2, r.frames + 1)}
            assert seen == expected

    def test_empty_report_writes_nothing(self, two_seq_report, tmp_path):
        import dataclasses
        empty = dataclasses.replace(two_seq_report, sequences=[])
        out = tmp_path / "nothing"
        with pytest.raises(DataError):
            emit_report(empty, "both", out)
        assert not out.exists()

    def test_unknown_format(self, two_seq_report, tmp_path):
        with pytest.raises(ValueError):
            emit_report(two_seq_report, "xml", tmp_path)


class TestDiscoverSequences:
    def test_single_sequence_dir(self, tmp_path):
        from desctrack.dataset import save_sequence
        save_sequence(_tiny_seq(1, "x"), tmp_path)
        seqs = discover_sequences(tmp_path)
        assert len(seqs) == 1

    def test_nested_sequences_sorted(self, tmp_path):
        from desctrack.dataset import save_sequence
        save_sequence(_tiny_seq(1, "b"), tmp_path / "b")
        save_sequence(_tiny_seq(2, "a"), tmp_path / "a")
        seqs = discover_sequences(tmp_path)
        assert [s.name for s in seqs] == ["a", "b"]

    def test_no_sequences_error(self, tmp_path):
        with pytest.raises(DataError):
            discover_sequences(tmp_path)

    def test_not_a_directory(self, tmp_path):
        with pytest.raises(DataError):
            discover_sequences(tmp_path / "missing")
