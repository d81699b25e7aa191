import numpy as np
import pytest
from PIL import Image

from desctrack.dataset import (
    Sequence,
    SynthesisConfig,
    generate_synthetic,
    load_sequence,
    make_preset,
    parse_box_rows,
    parse_ground_truth,
    rgb_to_gray,
    save_sequence,
    serialize_boxes,
)
from desctrack.errors import GenerationError, GroundTruthError, SequenceError
from desctrack.geometry import OrientedBox, SimilarityTransform, overlap, transform_box

from oracles import random_quad


class TestParseGroundTruth:
    def test_basic_row(self):
        boxes = parse_ground_truth("0 0 10 0 10 10 0 10")
        assert len(boxes) == 1
        assert boxes[0] == OrientedBox.from_rect(0, 0, 10, 10)

    def test_comma_separated(self):
        boxes = parse_ground_truth("0,0, 10,0, 10,10, 0,10")
        assert boxes[0] == OrientedBox.from_rect(0, 0, 10, 10)

    def test_comments_and_blanks_skipped(self):
        text = "# header\n\n0 0 10 0 10 10 0 10\n   \n"
        assert len(parse_ground_truth(text)) == 1

    def test_wrong_arity_reports_line(self):
        with pytest.raises(GroundTruthError, match="line 1"):
            parse_ground_truth("0 0 10 0 10 10")

    def test_non_numeric_reports_line(self):
        with pytest.raises(GroundTruthError, match="line 2"):
            parse_ground_truth("0 0 10 0 10 10 0 10\n0 0 x 0 10 10 0 10")

    def test_collinear_reports_line(self):
        # zero shoelace area
        with pytest.raises(GroundTruthError, match="line 1"):
            parse_ground_truth("0 0 1 1 2 2 3 3")

    def test_bytes_input(self):
        assert len(parse_ground_truth(b"0 0 10 0 10 10 0 10")) == 1

    def test_nan_rows_rejected_in_strict_mode(self):
        with pytest.raises(GroundTruthError):
            parse_ground_truth(" ".join(["nan"] * 8))

    def test_nan_rows_allowed_as_absent(self):
        rows = parse_box_rows(" ".join(["nan"] * 8) + "\n0 0 10 0 10 10 0 10")
        assert rows[0] is None
        assert rows[1] is not None


class TestSerializeRoundTrip:
    def test_roundtrip_within_tolerance(self, rng):
        boxes = [OrientedBox(random_quad(rng)) for _ in range(50)]
        parsed = parse_ground_truth(serialize_boxes(boxes))
        for a, b in zip(boxes, parsed):
            assert np.abs(a.vertices - b.vertices).max() < 1e-6

    def test_absent_roundtrip(self):
        rows = parse_box_rows(serialize_boxes([None, OrientedBox.from_rect(0, 0, 5, 5)]))
        assert rows[0] is None
        assert rows[1] == OrientedBox.from_rect(0, 0, 5, 5)


class TestLoadSequence:
    def _write_frames(self, directory, count, size=(40, 30)):
        rng = np.random.default_rng(0)
        for i in range(count):
            arr = rng.integers(0, 255, size=(size[1], size[0]), dtype=np.uint8)
            Image.fromarray(arr, mode="L").save(directory / f"{i:04d}.png")

    def _gt_rows(self, count):
        return "\n".join(["5 5 20 5 20 20 5 20"] * count)

    def test_loads_matching_counts(self, tmp_path):
        self._write_frames(tmp_path, 3)
        (tmp_path / "groundtruth.txt").write_text(self._gt_rows(3))
        seq = load_sequence(tmp_path)
        assert len(seq) == 3
        assert seq.frames[0].shape == (30, 40)

    def test_count_mismatch(self, tmp_path):
        self._write_frames(tmp_path, 3)
        (tmp_path / "groundtruth.txt").write_text(self._gt_rows(2))
        with pytest.raises(SequenceError, match="3 frames but 2"):
            load_sequence(tmp_path)

    def test_missing_ground_truth(self, tmp_path):
        self._write_frames(tmp_path, 2)
        with pytest.raises(SequenceError, match="groundtruth.txt"):
            load_sequence(tmp_path)

    def test_undecodable_image(self, tmp_path):
        (tmp_path / "0001.png").write_bytes(b"not a png")
        (tmp_path / "0002.png").write_bytes(b"also not")
        (tmp_path / "groundtruth.txt").write_text(self._gt_rows(2))
        with pytest.raises(SequenceError, match="0001.png"):
            load_sequence(tmp_path)

    def test_gray_luma_conversion(self, tmp_path):
        # pure gray (128,128,128) has luma exactly 128
        rgb = np.full((30, 40, 3), 128, dtype=np.uint8)
        for i in range(2):
            Image.fromarray(rgb, mode="RGB").save(tmp_path / f"{i}.png")
        (tmp_path / "groundtruth.txt").write_text(self._gt_rows(2))
        seq = load_sequence(tmp_path)
        assert np.all(seq.frames[0] == 128)

    def test_luma_weights(self):
        # single red pixel: round(0.299 * 200) == 60
        rgb = np.zeros((1, 1, 3), dtype=np.uint8)
        rgb[0, 0, 0] = 200
        assert rgb_to_gray(rgb)[0, 0] == 60

    def test_pgm_binary_decode(self, tmp_path):
        data = np.arange(12, dtype=np.uint8).reshape(3, 4)
        (tmp_path / "a.pgm").write_bytes(b"P5\n4 3\n255\n" + data.tobytes())
        (tmp_path / "b.pgm").write_bytes(b"P5\n4 3\n255\n" + data.tobytes())
        (tmp_path / "groundtruth.txt").write_text("0 0 2 0 2 2 0 2\n0 0 2 0 2 2 0 2")
        seq = load_sequence(tmp_path)
        assert np.array_equal(seq.frames[0], data)

    def test_frames_sorted_lexicographically(self, tmp_path):
        for i, name in enumerate(["b.png", "a.png"]):
            arr = np.full((30, 40), i * 100, dtype=np.uint8)
            Image.fromarray(arr, mode="L").save(tmp_path / name)
        (tmp_path / "groundtruth.txt").write_text(self._gt_rows(2))
        seq = load_sequence(tmp_path)
        assert np.all(seq.frames[0] == 100)  # a.png was written second


class TestSequenceValidation:
    def test_requires_two_frames(self):
        frame = np.zeros((30, 40), dtype=np.uint8)
        box = OrientedBox.from_rect(0, 0, 5, 5)
        with pytest.raises(ValueError):
            Sequence(name="x", frames=[frame], ground_truth=[box])

    def test_requires_parallel_ground_truth(self):
        frame = np.zeros((30, 40), dtype=np.uint8)
        box = OrientedBox.from_rect(0, 0, 5, 5)
        with pytest.raises(ValueError):
            Sequence(name="x", frames=[frame, frame], ground_truth=[box])


def _identity_cfg(**kw):
    defaults = dict(
        width=160, height=120, frame_count=3,
        motion=[SimilarityTransform() for _ in range(3)],
        texture_seed=5, noise_sigma=0.0,
        object_center=(80.0, 60.0), object_size=(50, 40),
    )
    defaults.update(kw)
    return SynthesisConfig(**defaults)


class TestGenerateSynthetic:
    def test_identity_schedule_gives_identical_frames(self):
        seq = generate_synthetic(_identity_cfg())
        assert np.array_equal(seq.frames[0], seq.frames[1])
        assert np.array_equal(seq.frames[0], seq.frames[2])
        assert seq.ground_truth[0] == seq.ground_truth[1]

    def test_pure_translation_shifts_ground_truth_exactly(self):
        motion = [SimilarityTransform(translation=(3.0 * t, 2.0 * t)) for t in range(3)]
        seq = generate_synthetic(_identity_cfg(motion=motion))
        for t in range(3):
            shifted = seq.ground_truth[0].vertices + [3.0 * t, 2.0 * t]
            assert np.allclose(seq.ground_truth[t].vertices, shifted, atol=1e-12)

    def test_same_seed_is_byte_identical(self):
        a = generate_synthetic(_identity_cfg())
        b = generate_synthetic(_identity_cfg())
        for fa, fb in zip(a.frames, b.frames):
            assert np.array_equal(fa, fb)

    def test_different_seed_differs(self):
        a = generate_synthetic(_identity_cfg())
        b = generate_synthetic(_identity_cfg(texture_seed=6))
        assert not np.array_equal(a.frames[0], b.frames[0])

    def test_ground_truth_matches_transforms(self):
        motion = [
            SimilarityTransform(scale=1.0 + 0.05 * t, rotation=0.1 * t,
                                translation=(2.0 * t, t))
            for t in range(3)
        ]
        cfg = _identity_cfg(motion=motion)
        seq = generate_synthetic(cfg)
        for t in range(3):
            expected = transform_box(motion[t], seq.ground_truth[0])
            assert overlap(seq.ground_truth[t], expected) == pytest.approx(1.0, abs=1e-9)

    def test_object_leaving_frame_names_frame(self):
        motion = [SimilarityTransform(translation=(100.0 * t, 0)) for t in range(3)]
        with pytest.raises(GenerationError, match="frame 2"):
            generate_synthetic(_identity_cfg(motion=motion))

    def test_occlusion_blanks_object_region(self):
        cfg = _identity_cfg(frame_count=4,
                            motion=[SimilarityTransform() for _ in range(4)],
                            occlusion_frames=(2, 3), occluder_margin=10.0)
        seq = generate_synthetic(cfg)
        gt = seq.ground_truth[1]
        cx, cy = gt.centroid
        region = seq.frames[1][int(cy) - 10:int(cy) + 10, int(cx) - 10:int(cx) + 10]
        assert np.all(region == 128)
        assert not np.array_equal(seq.frames[0], seq.frames[1])
        assert np.array_equal(seq.frames[0], seq.frames[3])  # reappears

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            _identity_cfg(frame_count=1, motion=[SimilarityTransform()])
        with pytest.raises(ValueError):
            _identity_cfg(noise_sigma=-1.0)
        with pytest.raises(ValueError):
            _identity_cfg(occlusion_frames=(0, 2))


class TestSaveLoadRoundTrip:
    def test_save_then_load(self, tmp_path):
        seq = generate_synthetic(_identity_cfg())
        save_sequence(seq, tmp_path / "seq")
        loaded = load_sequence(tmp_path / "seq")
        assert len(loaded) == len(seq)
        for a, b in zip(seq.frames, loaded.frames):
            assert np.array_equal(a, b)
        for a, b in zip(seq.ground_truth, loaded.ground_truth):
            assert np.abs(a.vertices - b.vertices).max() < 1e-6


class TestPresets:
    @pytest.mark.parametrize("name", ["translation", "rotscale", "occlusion"])
    def test_presets_generate(self, name):
        cfg = make_preset(name, 7)
        cfg.frame_count = min(cfg.frame_count, 4)
        cfg.motion = cfg.motion[:cfg.frame_count]
        if cfg.occlusion_frames is not None:
            cfg.occlusion_frames = (2, 3)
        seq = generate_synthetic(cfg)
        assert len(seq) == cfg.frame_count

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            make_preset("zoom", 0)
