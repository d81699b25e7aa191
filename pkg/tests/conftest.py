import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from desctrack.dataset import SynthesisConfig, generate_synthetic
from desctrack.geometry import SimilarityTransform


def _translation_schedule(n, dx, dy):
    return [SimilarityTransform(translation=(dx * t, dy * t)) for t in range(n)]


@pytest.fixture(scope="session")
def small_translation_seq():
    """20 frames, 320x240, object moving (2, 1) px/frame."""
    cfg = SynthesisConfig(
        width=320, height=240, frame_count=20,
        motion=_translation_schedule(20, 2.0, 1.0),
        texture_seed=11, noise_sigma=1.5,
        object_center=(100.0, 90.0), object_size=(90, 70),
    )
    return generate_synthetic(cfg, name="small-translation")


@pytest.fixture(scope="session")
def static_seq():
    """5 identical frames (identity motion, no noise)."""
    cfg = SynthesisConfig(
        width=320, height=240, frame_count=5,
        motion=[SimilarityTransform() for _ in range(5)],
        texture_seed=3, noise_sigma=0.0,
        object_center=(160.0, 120.0), object_size=(100, 80),
    )
    return generate_synthetic(cfg, name="static")


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
