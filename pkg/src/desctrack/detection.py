"""Multi-scale FAST corner detection with oriented keypoints.

The detector runs a segment test on a 16-pixel Bresenham circle per
pyramid level, suppresses non-maxima, assigns an intensity-centroid
orientation, and maps positions back to full resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .geometry import Point2

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dx, dy)
CIRCLE_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)

# a 31x31 descriptor patch must fit around every emitted keypoint
PATCH_MARGIN = 15

_MIN_PYRAMID_SIDE = 32


@dataclass(frozen=True)
class DetectorConfig:
    max_features: int = 2500
    octaves: int = 4
    fast_threshold: float = 20.0
    arc_length: int = 9
    nms_radius: float = 3.0
    pyramid_scale: float = math.sqrt(2.0)

    def __post_init__(self):
        if self.max_features <= 0:
            raise ValueError("max_features must be positive")
        if self.octaves < 1:
            raise ValueError("octaves must be >= 1")
        if not 9 <= self.arc_length <= 16:
            raise ValueError("arc_length must be in [9, 16]")
        if self.fast_threshold <= 0 or self.nms_radius < 0:
            raise ValueError("fast_threshold must be > 0 and nms_radius >= 0")
        if self.pyramid_scale <= 1.0:
            raise ValueError("pyramid_scale must be > 1")


@dataclass(frozen=True)
class Keypoint:
    """Detected corner in full-resolution coordinates."""

    x: float
    y: float
    octave: int
    response: float
    orientation: float
    scale_factor: float

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


# ---------------------------------------------------------------------------
# Pyramid
# ---------------------------------------------------------------------------

_BINOMIAL = np.array([1.0, 4.0, 6.0, 4.0, 1.0], dtype=np.float32) / 16.0


def _binomial_blur(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    p = np.pad(img, ((2, 2), (0, 0)), mode="reflect")
    img = sum(p[i:i + h, :] * _BINOMIAL[i] for i in range(5))
    p = np.pad(img, ((0, 0), (2, 2)), mode="reflect")
    return sum(p[:, i:i + w] * _BINOMIAL[i] for i in range(5))


def _downsample(img: np.ndarray, new_h: int, new_w: int, scale: float) -> np.ndarray:
    """Bilinear resample with source coords dst * scale (corner-aligned)."""
    h, w = img.shape
    xs = np.arange(new_w) * scale
    ys = np.arange(new_h) * scale
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 2)
    fx = np.clip(xs - x0, 0.0, 1.0).astype(np.float32)
    fy = np.clip(ys - y0, 0.0, 1.0).astype(np.float32)
    wy0, wy1 = (1 - fy)[:, None], fy[:, None]
    wx0, wx1 = (1 - fx)[None, :], fx[None, :]
    return (img[np.ix_(y0, x0)] * wy0 * wx0 + img[np.ix_(y0, x0 + 1)] * wy0 * wx1
            + img[np.ix_(y0 + 1, x0)] * wy1 * wx0 + img[np.ix_(y0 + 1, x0 + 1)] * wy1 * wx1)


def build_pyramid(img: np.ndarray, octaves: int, scale: float = math.sqrt(2.0)) -> list[np.ndarray]:
    """Level 0 is the input; each level is blurred then resampled by 1/scale.

    Octaves whose size would drop below 32x32 are dropped. Levels are
    float32 so resampled intensities keep sub-integer detail.
    """
    img = np.asarray(img, dtype=np.float32)
    if img.ndim != 2:
        raise ValueError("expected a single-channel image")
    if min(img.shape) < _MIN_PYRAMID_SIDE:
        raise ValueError(f"image {img.shape[1]}x{img.shape[0]} smaller than 32x32")
    levels = [img]
    for _ in range(1, octaves):
        prev = levels[-1]
        new_h = int(round(prev.shape[0] / scale))
        new_w = int(round(prev.shape[1] / scale))
        if min(new_h, new_w) < _MIN_PYRAMID_SIDE:
            break
        levels.append(_downsample(_binomial_blur(prev), new_h, new_w, scale))
    return levels


# ---------------------------------------------------------------------------
# FAST segment test
# ---------------------------------------------------------------------------

_RUN_LUT_CACHE: dict[int, np.ndarray] = {}


def _circular_run_lut(min_run: int) -> np.ndarray:
    """LUT over 16-bit ring masks: True iff a circular run of ones >= min_run."""
    lut = _RUN_LUT_CACHE.get(min_run)
    if lut is None:
        values = np.arange(65536, dtype=np.uint32)
        bits = ((values[:, None] >> np.arange(16)) & 1).astype(bool)
        doubled = np.concatenate([bits, bits], axis=1)
        run = np.zeros(65536, dtype=np.int32)
        best = np.zeros(65536, dtype=np.int32)
        for i in range(32):
            run = (run + 1) * doubled[:, i]
            np.maximum(best, run, out=best)
        lut = best >= min_run
        _RUN_LUT_CACHE[min_run] = lut
    return lut


def _fast_detect_arrays(img: np.ndarray, threshold: float, arc_length: int):
    """Vectorized segment test; returns (xs, ys, responses) arrays.

    A compass prefilter (any run of >= 9 contiguous circle pixels must
    include at least 2 of the 4 compass points) prunes most pixels before
    the full 16-pixel test.
    """
    if not 9 <= arc_length <= 16:
        raise ValueError("arc_length must be in [9, 16]")
    img = np.asarray(img, dtype=np.float32)
    h, w = img.shape
    empty = (np.empty(0, int), np.empty(0, int), np.empty(0, np.float64))
    if h < 7 or w < 7:
        return empty
    center = img[3:h - 3, 3:w - 3]
    hi = center + threshold
    lo = center - threshold
    masks = []
    for group in ((0, 4, 8, 12), (2, 6, 10, 14)):
        bright_count = np.zeros(center.shape, dtype=np.uint8)
        dark_count = np.zeros(center.shape, dtype=np.uint8)
        for i in group:
            dx, dy = CIRCLE_OFFSETS[i]
            ring = img[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx]
            bright_count += ring > hi
            dark_count += ring < lo
        masks.append((bright_count >= 2, dark_count >= 2))
    cand_y, cand_x = np.nonzero((masks[0][0] & masks[1][0])
                                | (masks[0][1] & masks[1][1]))
    if len(cand_y) == 0:
        return empty
    rings = np.stack([img[cand_y + 3 + dy, cand_x + 3 + dx]
                      for dx, dy in CIRCLE_OFFSETS])
    c = center[cand_y, cand_x]
    bright = rings > c + threshold
    dark = rings < c - threshold
    vb = np.zeros(len(cand_y), dtype=np.uint16)
    vd = np.zeros(len(cand_y), dtype=np.uint16)
    for i in range(16):
        vb |= bright[i].astype(np.uint16) << i
        vd |= dark[i].astype(np.uint16) << i
    lut = _circular_run_lut(arc_length)
    is_bright = lut[vb]
    is_dark = lut[vd]
    corner = is_bright | is_dark
    if not corner.any():
        return empty
    keep = np.nonzero(corner)[0]
    diffs = np.abs(rings[:, keep] - c[keep])
    resp_bright = (diffs * bright[:, keep]).sum(axis=0)
    resp_dark = (diffs * dark[:, keep]).sum(axis=0)
    responses = np.where(is_bright[keep], resp_bright, resp_dark).astype(np.float64)
    return cand_x[keep] + 3, cand_y[keep] + 3, responses


def fast_detect(img: np.ndarray, threshold: float, arc_length: int = 9) -> list[tuple[Point2, float]]:
    """FAST corners: a pixel passes if >= arc_length contiguous circle pixels
    are all brighter than center+threshold or all darker than center-threshold.

    The response is the sum of |ring - center| over all circle pixels beyond
    the threshold in the winning polarity.
    """
    xs, ys, responses = _fast_detect_arrays(img, threshold, arc_length)
    return [(Point2(float(x), float(y)), float(r))
            for x, y, r in zip(xs, ys, responses)]


# ---------------------------------------------------------------------------
# Non-maximum suppression
# ---------------------------------------------------------------------------

def _nms_grid(xs, ys, responses, radius: int) -> np.ndarray:
    """Dense-grid NMS for integer coordinates; returns a keep mask."""
    x0, y0 = xs.min(), ys.min()
    gw = int(xs.max() - x0 + 1)
    gh = int(ys.max() - y0 + 1)
    gx = xs - x0
    gy = ys - y0
    grid = np.full((gh + 2 * radius, gw + 2 * radius), -np.inf)
    np.maximum.at(grid, (gy + radius, gx + radius), responses)
    core = grid[radius:radius + gh, radius:radius + gw]
    alive = np.ones((gh, gw), dtype=bool)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx == 0 and dy == 0:
                continue
            neighbor = grid[radius + dy:radius + dy + gh, radius + dx:radius + dx + gw]
            if dy < 0 or (dy == 0 and dx < 0):
                alive &= ~(neighbor >= core)  # earlier neighbor wins ties
            else:
                alive &= ~(neighbor > core)
    keep = alive[gy, gx] & (responses == core[gy, gx])
    # duplicate positions: keep only the first winner per pixel
    linear = gy[keep].astype(np.int64) * gw + gx[keep]
    if len(np.unique(linear)) != len(linear):
        winners = np.nonzero(keep)[0]
        seen = set()
        for i in winners:
            cell = (int(gy[i]), int(gx[i]))
            if cell in seen:
                keep[i] = False
            else:
                seen.add(cell)
    return keep


def _nms_cells(xs, ys, responses, radius: float) -> np.ndarray:
    """Hash-grid NMS for arbitrary float coordinates."""
    cell = radius if radius > 0 else 1.0
    cells: dict[tuple[int, int], list[int]] = {}
    keys = [(int(math.floor(x / cell)), int(math.floor(y / cell)))
            for x, y in zip(xs, ys)]
    for i, key in enumerate(keys):
        cells.setdefault(key, []).append(i)
    keep = np.ones(len(xs), dtype=bool)
    for i in range(len(xs)):
        kx, ky = keys[i]
        for nx in (kx - 1, kx, kx + 1):
            for ny in (ky - 1, ky, ky + 1):
                for j in cells.get((nx, ny), ()):
                    if j == i:
                        continue
                    if abs(xs[j] - xs[i]) > radius or abs(ys[j] - ys[i]) > radius:
                        continue
                    if responses[j] > responses[i] or (
                        responses[j] == responses[i]
                        and (ys[j], xs[j], j) < (ys[i], xs[i], i)
                    ):
                        keep[i] = False
                        break
                if not keep[i]:
                    break
            if not keep[i]:
                break
    return keep


def _nms_mask(xs: np.ndarray, ys: np.ndarray, responses: np.ndarray, radius: float) -> np.ndarray:
    if len(xs) == 0:
        return np.zeros(0, dtype=bool)
    integral = np.all(xs == np.round(xs)) and np.all(ys == np.round(ys))
    if integral and len(xs) > 16:
        return _nms_grid(xs.astype(np.int64), ys.astype(np.int64), responses,
                         int(math.floor(radius)))
    return _nms_cells(xs, ys, responses, radius)


def nonmax_suppress(candidates: Iterable[tuple[Point2, float]], radius: float) -> list[tuple[Point2, float]]:
    """Keep a candidate iff its response beats every other candidate within
    Chebyshev distance `radius`; ties keep exactly one (lowest y, then x).
    """
    candidates = list(candidates)
    if not candidates:
        return []
    xs = np.array([float(p[0]) for p, _ in candidates])
    ys = np.array([float(p[1]) for p, _ in candidates])
    responses = np.array([float(r) for _, r in candidates])
    keep = _nms_mask(xs, ys, responses, radius)
    return [candidates[i] for i in np.nonzero(keep)[0]]


# ---------------------------------------------------------------------------
# Orientation
# ---------------------------------------------------------------------------

_DISC_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _disc_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    offs = _DISC_CACHE.get(radius)
    if offs is None:
        r = np.arange(-radius, radius + 1)
        dy, dx = np.meshgrid(r, r, indexing="ij")
        mask = dx * dx + dy * dy <= radius * radius
        offs = (dx[mask].ravel(), dy[mask].ravel())
        _DISC_CACHE[radius] = offs
    return offs


def _orientations(img: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: int) -> np.ndarray:
    """Intensity-centroid angles, vectorized over integer keypoint coords."""
    dxs, dys = _disc_offsets(radius)
    patch = img[ys[:, None] + dys[None, :], xs[:, None] + dxs[None, :]].astype(np.float64)
    m10 = patch @ dxs.astype(np.float64)
    m01 = patch @ dys.astype(np.float64)
    theta = np.arctan2(m01, m10)
    theta[theta <= -math.pi] = math.pi
    return theta


def orientation_intensity_centroid(img: np.ndarray, p, patch_radius: int = 15) -> float:
    """atan2 of first-order patch moments over a disc centered at p.

    The patch must lie fully inside the image. A zero-moment (radially
    symmetric) patch yields 0 by the atan2(0, 0) convention.
    """
    img = np.asarray(img, dtype=np.float32)
    x = int(round(float(p[0])))
    y = int(round(float(p[1])))
    h, w = img.shape
    if not (patch_radius <= x < w - patch_radius and patch_radius <= y < h - patch_radius):
        raise ValueError(f"patch around ({x}, {y}) exits the image")
    return float(_orientations(img, np.array([x]), np.array([y]), patch_radius)[0])


# ---------------------------------------------------------------------------
# Multi-scale detection
# ---------------------------------------------------------------------------

def detect_multiscale(img: np.ndarray, cfg: DetectorConfig = DetectorConfig()) -> list[Keypoint]:
    """FAST + NMS per pyramid level, orientation at the detection level,
    coordinates mapped to level 0, top max_features by response.

    Keypoints whose 31x31 descriptor patch would exit their level are
    dropped. Ties during truncation break by (octave, y, x) ascending.
    """
    levels = build_pyramid(img, cfg.octaves, cfg.pyramid_scale)
    all_x, all_y, all_o, all_r = [], [], [], []
    for octave, level in enumerate(levels):
        xs, ys, responses = _fast_detect_arrays(level, cfg.fast_threshold, cfg.arc_length)
        if len(xs) == 0:
            continue
        mask = _nms_mask(xs.astype(np.float64), ys.astype(np.float64),
                         responses, cfg.nms_radius)
        if not mask.any():
            continue
        kx = xs[mask]
        ky = ys[mask]
        kr = responses[mask]
        h, w = level.shape
        ok = ((kx >= PATCH_MARGIN) & (kx <= w - 1 - PATCH_MARGIN)
              & (ky >= PATCH_MARGIN) & (ky <= h - 1 - PATCH_MARGIN))
        if not ok.any():
            continue
        all_x.append(kx[ok])
        all_y.append(ky[ok])
        all_o.append(np.full(int(ok.sum()), octave))
        all_r.append(kr[ok])
    if not all_x:
        return []
    x = np.concatenate(all_x)
    y = np.concatenate(all_y)
    octaves = np.concatenate(all_o)
    responses = np.concatenate(all_r)
    order = np.lexsort((x, y, octaves, -responses))[:cfg.max_features]
    x, y, octaves, responses = x[order], y[order], octaves[order], responses[order]
    # orientation only for the survivors (it does not affect selection)
    thetas = np.empty(len(order))
    for octave in np.unique(octaves):
        sel = octaves == octave
        thetas[sel] = _orientations(levels[octave], x[sel], y[sel], PATCH_MARGIN)
    scale = cfg.pyramid_scale
    return [
        Keypoint(x=float(x[i]) * float(scale ** int(octaves[i])),
                 y=float(y[i]) * float(scale ** int(octaves[i])),
                 octave=int(octaves[i]),
                 response=float(responses[i]), orientation=float(thetas[i]),
                 scale_factor=float(scale ** int(octaves[i])))
        for i in range(len(order))
    ]
