"""Sequence loading, ground-truth files, and synthetic sequence generation.

Images are plain numpy arrays of shape (height, width), dtype uint8.
A sequence directory holds lexicographically ordered frames plus a
``groundtruth.txt`` with one row of 8 reals per frame: the (x, y) pairs
of the four box vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence as Seq

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import GenerationError, GroundTruthError, SequenceError
from .geometry import OrientedBox, SimilarityTransform, points_in_box, transform_box

GROUND_TRUTH_FILENAME = "groundtruth.txt"
_IMAGE_EXTENSIONS = {".png", ".pgm"}

# luma weights for color -> gray conversion
_LUMA = np.array([0.299, 0.587, 0.114])


def validate_gray_image(img: np.ndarray) -> np.ndarray:
    """Check that img is a (h, w) uint8 array and return it."""
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError(f"expected 2-D uint8 image, got shape {img.shape} dtype {img.dtype}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be non-empty")
    return img


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Weighted luma conversion, rounded to the nearest integer."""
    gray = np.rint(rgb[..., :3].astype(np.float64) @ _LUMA)
    return np.clip(gray, 0, 255).astype(np.uint8)


@dataclass
class Sequence:
    """An ordered run of frames with one ground-truth box per frame."""

    name: str
    frames: list[np.ndarray]
    ground_truth: list[OrientedBox]

    def __post_init__(self):
        if len(self.frames) < 2:
            raise ValueError("a sequence needs at least 2 frames")
        if len(self.ground_truth) != len(self.frames):
            raise ValueError(
                f"{len(self.frames)} frames but {len(self.ground_truth)} ground-truth boxes"
            )
        self.frames = [validate_gray_image(f) for f in self.frames]

    def __len__(self) -> int:
        return len(self.frames)


def _iter_rows(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.replace(",", " ").split()


def _parse_box_rows(text, allow_absent: bool):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    boxes = []
    for lineno, fields in _iter_rows(text):
        if len(fields) != 8:
            raise GroundTruthError(
                f"line {lineno}: expected 8 values, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise GroundTruthError(f"line {lineno}: non-numeric field") from None
        if allow_absent and all(math.isnan(v) for v in values):
            boxes.append(None)
            continue
        try:
            boxes.append(OrientedBox(np.asarray(values).reshape(4, 2)))
        except ValueError as exc:
            raise GroundTruthError(f"line {lineno}: {exc}") from None
    return boxes


def parse_ground_truth(text) -> list[OrientedBox]:
    """Parse ground-truth rows (8 reals each) into boxes.

    Accepts str or UTF-8 bytes; blank lines and '#' comments are skipped.
    Separators may be whitespace or commas.
    """
    return _parse_box_rows(text, allow_absent=False)


def parse_box_rows(text) -> list[Optional[OrientedBox]]:
    """Like :func:`parse_ground_truth` but a row of 8 NaNs means "absent"."""
    return _parse_box_rows(text, allow_absent=True)


def serialize_boxes(boxes: Seq[Optional[OrientedBox]]) -> str:
    """One row of 8 reals per box; absent boxes become 8 NaNs."""
    rows = []
    for b in boxes:
        if b is None:
            rows.append(" ".join(["nan"] * 8))
        else:
            rows.append(" ".join(f"{v:.12g}" for v in b.vertices.ravel()))
    return "\n".join(rows) + "\n"


def _decode_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode in ("L",):
                return np.asarray(im, dtype=np.uint8)
            if im.mode in ("P", "LA"):
                im = im.convert("RGB")
            if im.mode in ("RGB", "RGBA"):
                return rgb_to_gray(np.asarray(im))
            raise SequenceError(f"{path}: unsupported mode {im.mode!r} (8-bit only)")
    except (UnidentifiedImageError, OSError) as exc:
        raise SequenceError(f"{path}: cannot decode image ({exc})") from None


def load_sequence(directory) -> Sequence:
    """Load every frame in `directory` together with its ground truth."""
    directory = Path(directory)
    gt_path = directory / GROUND_TRUTH_FILENAME
    if not gt_path.is_file():
        raise SequenceError(f"{gt_path}: ground-truth file not found")
    boxes = parse_ground_truth(gt_path.read_text())
    frame_paths = sorted(
        p for p in directory.iterdir() if p.suffix.lower() in _IMAGE_EXTENSIONS
    )
    if len(frame_paths) != len(boxes):
        raise SequenceError(
            f"{directory}: {len(frame_paths)} frames but {len(boxes)} ground-truth rows"
        )
    frames = [_decode_image(p) for p in frame_paths]
    return Sequence(name=directory.name, frames=frames, ground_truth=boxes)


def save_sequence(seq: Sequence, directory) -> None:
    """Write frames as PNG plus groundtruth.txt, loadable by load_sequence."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(seq.frames, start=1):
        Image.fromarray(frame, mode="L").save(directory / f"{i:08d}.png")
    (directory / GROUND_TRUTH_FILENAME).write_text(serialize_boxes(seq.ground_truth))


# ---------------------------------------------------------------------------
# Synthetic sequences
# ---------------------------------------------------------------------------

@dataclass
class SynthesisConfig:
    """Recipe for a synthetic sequence with exact ground truth.

    `motion[t]` maps initial object coordinates to frame t+1 coordinates
    (so motion[0] is normally the identity). The object is a textured
    rectangle of `object_size` centered at `object_center` in frame 1;
    during `occlusion_frames` (1-based, inclusive) the object is hidden
    behind a flat occluder that extends `occluder_margin` pixels past it.
    """

    width: int
    height: int
    frame_count: int
    motion: list[SimilarityTransform]
    texture_seed: int = 0
    noise_sigma: float = 0.0
    occlusion_frames: Optional[tuple[int, int]] = None
    object_center: Optional[tuple[float, float]] = None
    object_size: Optional[tuple[float, float]] = None
    occluder_margin: float = 24.0

    def __post_init__(self):
        if self.frame_count < 2:
            raise ValueError("frame_count must be >= 2")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if len(self.motion) != self.frame_count:
            raise ValueError(
                f"motion schedule has {len(self.motion)} entries for {self.frame_count} frames"
            )
        if self.object_center is None:
            self.object_center = (self.width / 2.0, self.height / 2.0)
        if self.object_size is None:
            self.object_size = (round(self.width / 3.0), round(self.height / 3.0))
        if self.occlusion_frames is not None:
            a, b = self.occlusion_frames
            if not (1 <= a <= b <= self.frame_count):
                raise ValueError(f"occlusion range {a}..{b} outside 1..{self.frame_count}")


def _value_noise(rng: np.random.Generator, height: int, width: int, cell: float) -> np.ndarray:
    """Bilinear value noise in [-1, 1] with features of roughly `cell` pixels."""
    gh = int(math.ceil(height / cell)) + 2
    gw = int(math.ceil(width / cell)) + 2
    grid = rng.uniform(-1.0, 1.0, size=(gh, gw))
    ys = np.arange(height) / cell
    xs = np.arange(width) / cell
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (g00 * (1 - fy) * (1 - fx) + g01 * (1 - fy) * fx
            + g10 * fy * (1 - fx) + g11 * fy * fx)


def _texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Two-frequency value noise with enough contrast for corner detectors."""
    coarse = _value_noise(rng, height, width, cell=13.0)
    fine = _value_noise(rng, height, width, cell=4.0)
    return np.clip(128.0 + 72.0 * coarse + 48.0 * fine, 8.0, 247.0)


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x0 = np.clip(np.floor(x).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(y).astype(int), 0, h - 2)
    fx = np.clip(x - x0, 0.0, 1.0)
    fy = np.clip(y - y0, 0.0, 1.0)
    return (img[y0, x0] * (1 - fy) * (1 - fx) + img[y0, x0 + 1] * (1 - fy) * fx
            + img[y0 + 1, x0] * fy * (1 - fx) + img[y0 + 1, x0 + 1] * fy * fx)


def _inflate_box(box: OrientedBox, margin: float) -> OrientedBox:
    """Scale a box about its centroid so every edge moves out by >= margin."""
    v = box.vertices
    c = v.mean(axis=0)
    dists = []
    for i in range(4):
        p, q = v[i], v[(i + 1) % 4]
        e = q - p
        dists.append(abs(e[0] * (c[1] - p[1]) - e[1] * (c[0] - p[0])) / math.hypot(*e))
    d = min(dists)
    factor = (d + margin) / d
    return OrientedBox(c + (v - c) * factor)


def generate_synthetic(cfg: SynthesisConfig, name: str = "synthetic") -> Sequence:
    """Render a textured moving rectangle over a static textured background.

    Deterministic for a fixed config: same seed gives byte-identical frames.
    Ground truth is the analytically transformed initial box.
    """
    w, h = cfg.width, cfg.height
    cx, cy = cfg.object_center
    ow, oh = cfg.object_size
    base_box = OrientedBox.from_rect(cx - ow / 2.0, cy - oh / 2.0,
                                     cx + ow / 2.0, cy + oh / 2.0)

    seeds = np.random.SeedSequence(cfg.texture_seed).spawn(3)
    background = _texture(np.random.default_rng(seeds[0]), h, w)
    # texture sampled on local integer coords 0..ow, 0..oh of the base rect
    obj_tex = _texture(np.random.default_rng(seeds[1]), int(oh) + 1, int(ow) + 1)
    noise_rng = np.random.default_rng(seeds[2])

    x0, y0 = cx - ow / 2.0, cy - oh / 2.0
    occl = cfg.occlusion_frames
    frames = []
    ground_truth = []
    pix_x, pix_y = np.meshgrid(np.arange(w, dtype=np.float64),
                               np.arange(h, dtype=np.float64))

    for t in range(cfg.frame_count):
        transform = cfg.motion[t]
        gt = transform_box(transform, base_box)
        verts = gt.vertices
        if (verts[:, 0].min() < 0 or verts[:, 0].max() > w - 1
                or verts[:, 1].min() < 0 or verts[:, 1].max() > h - 1):
            raise GenerationError(f"frame {t + 1}: object leaves the frame")

        frame = background.copy()
        occluded = occl is not None and occl[0] <= t + 1 <= occl[1]
        if occluded:
            blank = _inflate_box(gt, cfg.occluder_margin)
            bx0 = max(int(math.floor(blank.vertices[:, 0].min())), 0)
            bx1 = min(int(math.ceil(blank.vertices[:, 0].max())) + 1, w)
            by0 = max(int(math.floor(blank.vertices[:, 1].min())), 0)
            by1 = min(int(math.ceil(blank.vertices[:, 1].max())) + 1, h)
            pts = np.column_stack([pix_x[by0:by1, bx0:bx1].ravel(),
                                   pix_y[by0:by1, bx0:bx1].ravel()])
            mask = points_in_box(pts, blank).reshape(by1 - by0, bx1 - bx0)
            region = frame[by0:by1, bx0:bx1]
            region[mask] = 128.0
        else:
            inv = transform.inverse()
            bx0 = max(int(math.floor(verts[:, 0].min())), 0)
            bx1 = min(int(math.ceil(verts[:, 0].max())) + 1, w)
            by0 = max(int(math.floor(verts[:, 1].min())), 0)
            by1 = min(int(math.ceil(verts[:, 1].max())) + 1, h)
            pts = np.column_stack([pix_x[by0:by1, bx0:bx1].ravel(),
                                   pix_y[by0:by1, bx0:bx1].ravel()])
            src = inv.apply(pts)
            u = src[:, 0] - x0
            v = src[:, 1] - y0
            inside = (u >= 0) & (u <= ow) & (v >= 0) & (v <= oh)
            values = frame[by0:by1, bx0:bx1].ravel()
            values[inside] = _bilinear(obj_tex, u[inside], v[inside])
            frame[by0:by1, bx0:bx1] = values.reshape(by1 - by0, bx1 - bx0)

        if cfg.noise_sigma > 0:
            frame = frame + noise_rng.normal(0.0, cfg.noise_sigma, size=frame.shape)
        frames.append(np.clip(np.rint(frame), 0, 255).astype(np.uint8))
        ground_truth.append(gt)

    return Sequence(name=name, frames=frames, ground_truth=ground_truth)


# ---------------------------------------------------------------------------
# Fixture presets
# ---------------------------------------------------------------------------

PRESET_NAMES = ("translation", "rotscale", "occlusion")


def _about_center(center, scale: float, rotation: float) -> SimilarityTransform:
    """Similarity that rotates/scales about a fixed point."""
    cx, cy = center
    c = math.cos(rotation) * scale
    s = math.sin(rotation) * scale
    return SimilarityTransform(
        scale=scale, rotation=rotation,
        translation=(cx - (c * cx - s * cy), cy - (s * cx + c * cy)),
    )


def make_preset(name: str, seed: int) -> SynthesisConfig:
    """Standard synthetic fixtures used by the benchmark and its tests."""
    if name == "translation":
        step = (1.6, 0.9)
        return SynthesisConfig(
            width=640, height=480, frame_count=200,
            motion=[SimilarityTransform(translation=(step[0] * t, step[1] * t))
                    for t in range(200)],
            texture_seed=seed, noise_sigma=2.0,
            object_center=(150.0, 120.0), object_size=(180, 140),
        )
    if name == "rotscale":
        center = (320.0, 240.0)
        motion = [
            _about_center(center,
                          scale=1.0 + 0.18 * math.sin(2 * math.pi * t / 50.0),
                          rotation=0.35 * math.sin(2 * math.pi * t / 100.0))
            for t in range(100)
        ]
        return SynthesisConfig(
            width=640, height=480, frame_count=100, motion=motion,
            texture_seed=seed, noise_sigma=2.0,
            object_center=center, object_size=(200, 150),
        )
    if name == "occlusion":
        return SynthesisConfig(
            width=480, height=360, frame_count=60,
            motion=[SimilarityTransform() for _ in range(60)],
            texture_seed=seed, noise_sigma=0.0,
            occlusion_frames=(25, 34),
            object_center=(240.0, 180.0), object_size=(140, 110),
        )
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
