"""Descriptor extraction and the pluggable extractor interface.

Two reference extractors are provided: ``binary256`` (steered pairwise
intensity comparisons, 256 bits) and ``gradhist64`` (4x4 spatial cells of
4-bin gradient-orientation histograms, 64 floats). Both operate at the
keypoint's pyramid level and drop keypoints whose patch exits the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .brief_pattern import COMPARISON_PAIRS
from .detection import PATCH_MARGIN, DetectorConfig, Keypoint, build_pyramid, detect_multiscale

BINARY = "binary"
FLOAT = "float"

ROTATION_BINS = 30  # pattern steering quantized to 12-degree steps

_FLAT_NORM_EPS = 1e-12


@dataclass
class DescriptorSet:
    """Parallel keypoints and descriptors of one homogeneous kind.

    `data` is (N, 32) uint8 for binary descriptors (bit i lives at byte
    i // 8, bit 7 - i % 8) or (N, 64) float64 with unit L2 norm for float
    descriptors. `flat` marks float descriptors of gradient-free patches
    (stored all-zero). `dropped` counts keypoints removed because their
    patch exited the pyramid level.
    """

    kind: str
    keypoints: list[Keypoint]
    data: np.ndarray
    flat: np.ndarray = field(default=None)
    dropped: int = 0

    def __post_init__(self):
        if self.kind not in (BINARY, FLOAT):
            raise ValueError(f"unknown descriptor kind {self.kind!r}")
        if self.flat is None:
            self.flat = np.zeros(len(self.keypoints), dtype=bool)
        if len(self.keypoints) != len(self.data) or len(self.flat) != len(self.data):
            raise ValueError("keypoints, data and flat must have equal lengths")

    def __len__(self) -> int:
        return len(self.keypoints)


def _rotated_patterns() -> tuple[np.ndarray, ...]:
    """Integer comparison offsets for each of the 30 orientation bins."""
    base = np.asarray(COMPARISON_PAIRS, dtype=np.float64)
    a = base[:, 0:2]
    b = base[:, 2:4]
    ax = np.empty((ROTATION_BINS, len(base)), dtype=np.intp)
    ay = np.empty_like(ax)
    bx = np.empty_like(ax)
    by = np.empty_like(ax)
    for k in range(ROTATION_BINS):
        theta = 2.0 * math.pi * k / ROTATION_BINS
        c, s = math.cos(theta), math.sin(theta)
        ax[k] = np.rint(c * a[:, 0] - s * a[:, 1])
        ay[k] = np.rint(s * a[:, 0] + c * a[:, 1])
        bx[k] = np.rint(c * b[:, 0] - s * b[:, 1])
        by[k] = np.rint(s * b[:, 0] + c * b[:, 1])
    return ax, ay, bx, by


_ROT_AX, _ROT_AY, _ROT_BX, _ROT_BY = _rotated_patterns()


def _box5_mean(img: np.ndarray) -> np.ndarray:
    """5x5 box-filtered image (edge-replicated; borders are never sampled)."""
    a = img.astype(np.float64)
    h, w = a.shape
    p = np.pad(a, ((2, 2), (0, 0)), mode="edge")
    a = sum(p[i:i + h, :] for i in range(5))
    p = np.pad(a, ((0, 0), (2, 2)), mode="edge")
    a = sum(p[:, i:i + w] for i in range(5))
    return a / 25.0


def _group_by_level(kps: Sequence[Keypoint], n_levels: int):
    groups: dict[int, list[int]] = {}
    for i, kp in enumerate(kps):
        if not 0 <= kp.octave < n_levels:
            raise ValueError(f"keypoint octave {kp.octave} outside pyramid of {n_levels} levels")
        groups.setdefault(kp.octave, []).append(i)
    return groups


def _orientation_bin(theta: np.ndarray) -> np.ndarray:
    step = 2.0 * math.pi / ROTATION_BINS
    return np.rint(theta / step).astype(int) % ROTATION_BINS


def brief_steered_extract(
    img: np.ndarray,
    kps: Sequence[Keypoint],
    pyramid_scale: float = math.sqrt(2.0),
) -> DescriptorSet:
    """256-bit descriptors from steered pairwise comparisons of smoothed
    intensities: bit i is 1 iff the smoothed value at point a_i is below
    the one at b_i after rotating the pattern by the keypoint orientation
    (quantized to 30 bins).

    Keypoints too close to their level border are dropped; the result's
    `dropped` field counts them.
    """
    kps = list(kps)
    n = len(kps)
    if n == 0:
        return DescriptorSet(kind=BINARY, keypoints=[], data=np.empty((0, 32), np.uint8))
    max_octave = max(kp.octave for kp in kps)
    levels = build_pyramid(img, max_octave + 1, pyramid_scale)
    groups = _group_by_level(kps, len(levels))
    data = np.zeros((n, 32), dtype=np.uint8)
    valid = np.zeros(n, dtype=bool)
    for octave, indices in groups.items():
        level = levels[octave]
        h, w = level.shape
        factor = pyramid_scale ** octave
        idx = np.asarray(indices)
        cx = np.rint(np.array([kps[i].x for i in indices]) / factor).astype(int)
        cy = np.rint(np.array([kps[i].y for i in indices]) / factor).astype(int)
        ok = ((cx >= PATCH_MARGIN) & (cx <= w - 1 - PATCH_MARGIN)
              & (cy >= PATCH_MARGIN) & (cy <= h - 1 - PATCH_MARGIN))
        if not ok.any():
            continue
        idx, cx, cy = idx[ok], cx[ok], cy[ok]
        bins = _orientation_bin(np.array([kps[i].orientation for i in idx]))
        smoothed = _box5_mean(level)
        va = smoothed[cy[:, None] + _ROT_AY[bins], cx[:, None] + _ROT_AX[bins]]
        vb = smoothed[cy[:, None] + _ROT_BY[bins], cx[:, None] + _ROT_BX[bins]]
        bits = va < vb
        data[idx] = np.packbits(bits, axis=1)
        valid[idx] = True
    kept = [kps[i] for i in range(n) if valid[i]]
    return DescriptorSet(kind=BINARY, keypoints=kept, data=data[valid],
                         dropped=n - len(kept))


def _gradient_maps(level: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = level.astype(np.float64)
    gx = np.zeros_like(g)
    gy = np.zeros_like(g)
    gx[:, 1:-1] = (g[:, 2:] - g[:, :-2]) * 0.5
    gy[1:-1, :] = (g[2:, :] - g[:-2, :]) * 0.5
    return gx, gy


def _bilinear_at(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    fx = x - x0
    fy = y - y0
    return (img[y0, x0] * (1 - fy) * (1 - fx) + img[y0, x0 + 1] * (1 - fy) * fx
            + img[y0 + 1, x0] * fy * (1 - fx) + img[y0 + 1, x0 + 1] * fy * fx)


# sample offsets of the 16x16 descriptor grid, spacing 1 pixel
_GRID = np.arange(16, dtype=np.float64) - 7.5


def grad_hist_extract(
    img: np.ndarray,
    kps: Sequence[Keypoint],
    pyramid_scale: float = math.sqrt(2.0),
) -> DescriptorSet:
    """64-dim float descriptors: a 16x16 sample grid rotated into the
    keypoint frame, gradient orientations measured relative to the
    keypoint, trilinearly binned into 4x4 spatial cells x 4 orientation
    bins, L2-normalized, clamped at 0.2 and renormalized.

    Gradient-free patches yield an all-zero descriptor flagged flat.
    """
    kps = list(kps)
    n = len(kps)
    if n == 0:
        return DescriptorSet(kind=FLOAT, keypoints=[], data=np.empty((0, 64), np.float64))
    max_octave = max(kp.octave for kp in kps)
    levels = build_pyramid(img, max_octave + 1, pyramid_scale)
    groups = _group_by_level(kps, len(levels))
    data = np.zeros((n, 64), dtype=np.float64)
    flat = np.zeros(n, dtype=bool)
    valid = np.zeros(n, dtype=bool)
    gu_off, gv_off = np.meshgrid(_GRID, _GRID)  # (16, 16) u across, v down
    gu_off = gu_off.ravel()
    gv_off = gv_off.ravel()
    for octave, indices in groups.items():
        level = levels[octave]
        h, w = level.shape
        factor = pyramid_scale ** octave
        idx = np.asarray(indices)
        px = np.array([kps[i].x for i in indices]) / factor
        py = np.array([kps[i].y for i in indices]) / factor
        ok = ((px >= PATCH_MARGIN) & (px <= w - 1 - PATCH_MARGIN)
              & (py >= PATCH_MARGIN) & (py <= h - 1 - PATCH_MARGIN))
        if not ok.any():
            continue
        idx, px, py = idx[ok], px[ok], py[ok]
        theta = np.array([kps[i].orientation for i in idx])
        cos_t = np.cos(theta)[:, None]
        sin_t = np.sin(theta)[:, None]
        sx = px[:, None] + cos_t * gu_off - sin_t * gv_off
        sy = py[:, None] + sin_t * gu_off + cos_t * gv_off
        gx_map, gy_map = _gradient_maps(level)
        gx = _bilinear_at(gx_map, sx, sy)
        gy = _bilinear_at(gy_map, sx, sy)
        gu = cos_t * gx + sin_t * gy      # gradient in the keypoint frame
        gv = -sin_t * gx + cos_t * gy
        mag = np.hypot(gu, gv)
        ang = np.mod(np.arctan2(gv, gu), 2.0 * math.pi)

        k = len(idx)
        rows = np.broadcast_to((gv_off + 8.0) / 4.0 - 0.5, (k, 256))
        cols = np.broadcast_to((gu_off + 8.0) / 4.0 - 0.5, (k, 256))
        obin = ang / (math.pi / 2.0)
        hist = np.zeros(k * 64, dtype=np.float64)
        r0 = np.floor(rows)
        c0 = np.floor(cols)
        o0 = np.floor(obin)
        fr = rows - r0
        fc = cols - c0
        fo = obin - o0
        kidx = np.broadcast_to(np.arange(k)[:, None], (k, 256))
        for dr in (0, 1):
            rbin = r0 + dr
            wr = np.where(dr == 0, 1.0 - fr, fr)
            row_ok = (rbin >= 0) & (rbin <= 3)
            for dc in (0, 1):
                cbin = c0 + dc
                wc = np.where(dc == 0, 1.0 - fc, fc)
                col_ok = (cbin >= 0) & (cbin <= 3)
                for do in (0, 1):
                    owrap = np.mod(o0 + do, 4)
                    wo = np.where(do == 0, 1.0 - fo, fo)
                    m = row_ok & col_ok
                    if not m.any():
                        continue
                    flat_idx = (((kidx * 4 + rbin) * 4 + cbin) * 4 + owrap)[m].astype(int)
                    hist += np.bincount(flat_idx, weights=(mag * wr * wc * wo)[m],
                                        minlength=k * 64)
        vecs = hist.reshape(k, 64)
        norms = np.linalg.norm(vecs, axis=1)
        is_flat = norms < _FLAT_NORM_EPS
        safe = np.where(is_flat, 1.0, norms)
        vecs = vecs / safe[:, None]
        vecs = np.minimum(vecs, 0.2)
        norms2 = np.linalg.norm(vecs, axis=1)
        safe2 = np.where(norms2 < _FLAT_NORM_EPS, 1.0, norms2)
        vecs = vecs / safe2[:, None]
        vecs[is_flat] = 0.0
        data[idx] = vecs
        flat[idx] = is_flat
        valid[idx] = True
    kept = [kps[i] for i in range(n) if valid[i]]
    return DescriptorSet(kind=FLOAT, keypoints=kept, data=data[valid],
                         flat=flat[valid], dropped=n - len(kept))


# ---------------------------------------------------------------------------
# Extractor interface
# ---------------------------------------------------------------------------

class DescriptorExtractor:
    """Detection + description behind one name, the benchmark's plug-in point.

    Implementations must be deterministic for fixed inputs and preserve
    keypoint order in extract() up to documented border drops.
    """

    name: str = "base"
    kind: str = BINARY

    def __init__(self, detector: DetectorConfig = DetectorConfig()):
        self.detector = detector

    def detect(self, img: np.ndarray) -> list[Keypoint]:
        return detect_multiscale(img, self.detector)

    def extract(self, img: np.ndarray, keypoints: Sequence[Keypoint]) -> DescriptorSet:
        raise NotImplementedError

    def detect_and_extract(self, img: np.ndarray) -> DescriptorSet:
        return self.extract(img, self.detect(img))


class Binary256Extractor(DescriptorExtractor):
    name = "binary256"
    kind = BINARY

    def extract(self, img, keypoints):
        return brief_steered_extract(img, keypoints, self.detector.pyramid_scale)


class GradHist64Extractor(DescriptorExtractor):
    name = "gradhist64"
    kind = FLOAT

    def extract(self, img, keypoints):
        return grad_hist_extract(img, keypoints, self.detector.pyramid_scale)


EXTRACTORS = {
    Binary256Extractor.name: Binary256Extractor,
    GradHist64Extractor.name: GradHist64Extractor,
}


def get_extractor(name: str, detector: DetectorConfig = DetectorConfig()) -> DescriptorExtractor:
    """Look up an extractor by CLI name."""
    try:
        cls = EXTRACTORS[name]
    except KeyError:
        known = ", ".join(sorted(EXTRACTORS))
        raise ValueError(f"unknown descriptor {name!r}; known: {known}") from None
    return cls(detector)
