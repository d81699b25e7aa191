"""Sparse keypoint tracker: pyramidal optical flow on the current point set,
similarity pose estimation against a fixed initial model, per-frame
re-detection and matching, and model-indexed merging.

The model (descriptors of the keypoints inside the initial box) is never
updated; recovery after loss re-matches it against the whole frame.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dataset import Sequence as ImageSequence
from .description import DescriptorExtractor, DescriptorSet
from .detection import Keypoint
from .errors import TrackInitError
from .geometry import OrientedBox, SimilarityTransform, points_in_box
from .matching import MatcherConfig, brute_force_match, filter_unambiguous


@dataclass(frozen=True)
class TrackerConfig:
    fb_error_threshold: float = 1.0
    lk_window: int = 21
    lk_pyramid_levels: int = 3
    lk_max_iters: int = 30
    lk_epsilon: float = 0.01
    min_inliers: int = 4
    ransac_iters: int = 200
    ransac_inlier_px: float = 3.0
    ransac_seed: int = 0
    redetect_inflation: float = 1.5

    def __post_init__(self):
        positives = (self.fb_error_threshold, self.lk_window, self.lk_pyramid_levels,
                     self.lk_max_iters, self.lk_epsilon, self.min_inliers,
                     self.ransac_iters, self.ransac_inlier_px, self.redetect_inflation)
        if any(v <= 0 for v in positives):
            raise ValueError("all tracker parameters must be positive")
        if self.lk_window % 2 == 0 or self.lk_window < 3:
            raise ValueError("lk_window must be odd and >= 3")


class _NullTimer:
    """No-op instrumentation hook used when a step is not being profiled."""

    @contextmanager
    def stage(self, name: str):
        yield

    def note_keypoints(self, count: int):
        pass


_NULL_TIMER = _NullTimer()


# ---------------------------------------------------------------------------
# Pyramidal Lucas-Kanade
# ---------------------------------------------------------------------------

def _lk_pyramid(img: np.ndarray, levels: int, window: int) -> list[np.ndarray]:
    from .detection import _binomial_blur, _downsample  # shared filtering

    base = np.asarray(img, dtype=np.float32)
    pyr = [base]
    for _ in range(1, levels):
        prev = pyr[-1]
        nh, nw = prev.shape[0] // 2, prev.shape[1] // 2
        if min(nh, nw) < window + 2:
            break
        pyr.append(_downsample(_binomial_blur(prev), nh, nw, 2.0))
    return pyr


def _sample_patches(img: np.ndarray, cx: np.ndarray, cy: np.ndarray,
                    offs: np.ndarray) -> np.ndarray:
    """Bilinear (N, W, W) patches around float centers, border-clamped."""
    h, w = img.shape
    x = np.clip(cx[:, None, None] + offs[None, None, :], 0.0, w - 1.0)
    y = np.clip(cy[:, None, None] + offs[None, :, None], 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(y).astype(int), 0, h - 2)
    fx = x - x0
    fy = y - y0
    return (img[y0, x0] * (1 - fy) * (1 - fx) + img[y0, x0 + 1] * (1 - fy) * fx
            + img[y0 + 1, x0] * fy * (1 - fx) + img[y0 + 1, x0 + 1] * fy * fx)


def _lk_pass(prev_pyr: list[np.ndarray], next_pyr: list[np.ndarray],
             pts: np.ndarray, cfg: TrackerConfig):
    """Track pts from prev to next; returns (positions, lost flags)."""
    n = len(pts)
    half = (cfg.lk_window - 1) // 2
    offs = np.arange(-half, half + 1, dtype=np.float64)
    offs_pad = np.arange(-half - 1, half + 2, dtype=np.float64)
    flow = np.zeros((n, 2), dtype=np.float64)
    singular = np.zeros(n, dtype=bool)
    eig_threshold = 1e-4 * cfg.lk_window * cfg.lk_window

    for lvl in reversed(range(len(prev_pyr))):
        prev = prev_pyr[lvl]
        nxt = next_pyr[lvl]
        scale = 2.0 ** lvl
        px = pts[:, 0] / scale
        py = pts[:, 1] / scale
        flow *= 2.0 if lvl < len(prev_pyr) - 1 else 1.0

        # one padded sample; central differences of the sampled surface
        # equal sampling the shifted surface, bilinear being linear
        big = _sample_patches(prev, px, py, offs_pad)
        patch = big[:, 1:-1, 1:-1]
        gx = (big[:, 1:-1, 2:] - big[:, 1:-1, :-2]) * 0.5
        gy = (big[:, 2:, 1:-1] - big[:, :-2, 1:-1]) * 0.5
        gxx = (gx * gx).sum(axis=(1, 2))
        gxy = (gx * gy).sum(axis=(1, 2))
        gyy = (gy * gy).sum(axis=(1, 2))
        det = gxx * gyy - gxy * gxy
        trace = gxx + gyy
        min_eig = 0.5 * (trace - np.sqrt(np.maximum(trace * trace - 4.0 * det, 0.0)))
        if lvl == 0:
            singular |= min_eig < eig_threshold
        solvable = det > 1e-12

        active = solvable.copy()
        for _ in range(cfg.lk_max_iters):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            cur = _sample_patches(nxt, px[idx] + flow[idx, 0], py[idx] + flow[idx, 1], offs)
            residual = patch[idx] - cur
            bx = (residual * gx[idx]).sum(axis=(1, 2))
            by = (residual * gy[idx]).sum(axis=(1, 2))
            d = det[idx]
            dx = (gyy[idx] * bx - gxy[idx] * by) / d
            dy = (gxx[idx] * by - gxy[idx] * bx) / d
            flow[idx, 0] += dx
            flow[idx, 1] += dy
            active[idx] = np.hypot(dx, dy) >= cfg.lk_epsilon

    out = pts + flow
    h, w = next_pyr[0].shape
    outside = ((out[:, 0] < 0) | (out[:, 0] > w - 1)
               | (out[:, 1] < 0) | (out[:, 1] > h - 1))
    return out, singular | outside


def lk_track_points(prev: np.ndarray, next_img: np.ndarray, pts,
                    cfg: TrackerConfig = TrackerConfig()):
    """Pyramidal Lucas-Kanade with a forward-backward consistency check.

    Returns (positions (N, 2), lost (N,) bool). A point is lost when it
    leaves the frame, its spatial gradient matrix at the finest level is
    near-singular (in either direction of the check), or the
    forward-backward error exceeds the configured threshold.
    """
    prev = np.asarray(prev)
    next_img = np.asarray(next_img)
    if prev.shape != next_img.shape:
        raise ValueError(f"frame shape mismatch: {prev.shape} vs {next_img.shape}")
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        return pts.copy(), np.zeros(0, dtype=bool)
    prev_pyr = _lk_pyramid(prev, cfg.lk_pyramid_levels, cfg.lk_window)
    next_pyr = _lk_pyramid(next_img, cfg.lk_pyramid_levels, cfg.lk_window)
    fwd, lost_fwd = _lk_pass(prev_pyr, next_pyr, pts, cfg)
    back, lost_back = _lk_pass(next_pyr, prev_pyr, fwd, cfg)
    fb_error = np.hypot(back[:, 0] - pts[:, 0], back[:, 1] - pts[:, 1])
    lost = lost_fwd | lost_back | (fb_error > cfg.fb_error_threshold)
    return fwd, lost


# ---------------------------------------------------------------------------
# Similarity pose estimation
# ---------------------------------------------------------------------------

def _similarity_from_pair(m1, m2, q1, q2) -> Optional[SimilarityTransform]:
    dm = (m2[0] - m1[0], m2[1] - m1[1])
    dq = (q2[0] - q1[0], q2[1] - q1[1])
    len_m = math.hypot(*dm)
    len_q = math.hypot(*dq)
    if len_m < 1e-9 or len_q < 1e-9:
        return None
    scale = len_q / len_m
    rotation = math.atan2(dq[1], dq[0]) - math.atan2(dm[1], dm[0])
    c = math.cos(rotation) * scale
    s = math.sin(rotation) * scale
    return SimilarityTransform(
        scale=scale, rotation=rotation,
        translation=(q1[0] - (c * m1[0] - s * m1[1]),
                     q1[1] - (s * m1[0] + c * m1[1])),
    )


def _similarity_least_squares(src: np.ndarray, dst: np.ndarray) -> Optional[SimilarityTransform]:
    """Closed-form least-squares similarity (no reflection) from src to dst."""
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    cs = src - mu_s
    cd = dst - mu_d
    var_s = (cs * cs).sum() / len(src)
    if var_s < 1e-12:
        return None
    cov = cd.T @ cs / len(src)
    u, d, vt = np.linalg.svd(cov)
    sign = 1.0 if np.linalg.det(u) * np.linalg.det(vt) >= 0 else -1.0
    r = u @ np.diag([1.0, sign]) @ vt
    scale = (d[0] + sign * d[1]) / var_s
    if not (scale > 1e-12 and math.isfinite(scale)):
        return None
    rotation = math.atan2(r[1, 0], r[0, 0])
    t = mu_d - scale * (r @ mu_s)
    return SimilarityTransform(scale=float(scale), rotation=float(rotation),
                               translation=(float(t[0]), float(t[1])))


def estimate_pose(correspondences, cfg: TrackerConfig = TrackerConfig()):
    """Seeded RANSAC over 2-point similarity hypotheses, then a closed-form
    least-squares refit on the best inlier set.

    `correspondences` is a sequence of (model_point, image_point) pairs.
    Returns (SimilarityTransform, inlier index array), or None when no
    hypothesis reaches `min_inliers` support.
    """
    corr = np.asarray(correspondences, dtype=np.float64)
    if corr.ndim != 3 or corr.shape[1:] != (2, 2):
        raise ValueError("correspondences must be pairs of 2-D points")
    n = len(corr)
    if n < cfg.min_inliers:
        return None
    model = corr[:, 0]
    image = corr[:, 1]
    rng = np.random.default_rng(cfg.ransac_seed)
    best_count = 0
    best_mask = None
    for _ in range(cfg.ransac_iters):
        i, j = rng.choice(n, size=2, replace=False)
        t = _similarity_from_pair(model[i], model[j], image[i], image[j])
        if t is None:
            continue
        err = np.linalg.norm(t.apply(model) - image, axis=1)
        mask = err <= cfg.ransac_inlier_px
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
    if best_mask is None or best_count < cfg.min_inliers:
        return None
    refined = _similarity_least_squares(model[best_mask], image[best_mask])
    if refined is None:
        return None
    return refined, np.nonzero(best_mask)[0]


# ---------------------------------------------------------------------------
# Track state and stepping
# ---------------------------------------------------------------------------

@dataclass
class TrackState:
    """Tracker state after processing frame `frame` (1-based).

    `current_model_idx` links each tracked point to its model keypoint
    (-1 when unanchored). `model_local` holds model keypoint coordinates
    relative to the initial box centroid; `box_local` the initial box
    vertices in the same frame.
    """

    model: DescriptorSet
    model_local: np.ndarray
    box_local: np.ndarray
    current_points: np.ndarray
    current_model_idx: np.ndarray
    current_box: Optional[OrientedBox]
    frame: int
    prev_image: np.ndarray
    lost: bool


def _keypoint_positions(kps: Sequence[Keypoint]) -> np.ndarray:
    return np.array([[kp.x, kp.y] for kp in kps], dtype=np.float64).reshape(-1, 2)


def init(img: np.ndarray, b1: OrientedBox, extractor: DescriptorExtractor,
         cfg: TrackerConfig = TrackerConfig()) -> TrackState:
    """Build the model from the keypoints detected inside the initial box."""
    dset = extractor.detect_and_extract(img)
    positions = _keypoint_positions(dset.keypoints)
    if len(positions) == 0:
        raise TrackInitError("no keypoints detected in the initial frame")
    inside = points_in_box(positions, b1)
    if int(inside.sum()) < cfg.min_inliers:
        raise TrackInitError(
            f"only {int(inside.sum())} model keypoints inside the initial box "
            f"(need {cfg.min_inliers})"
        )
    model = DescriptorSet(
        kind=dset.kind,
        keypoints=[kp for kp, ok in zip(dset.keypoints, inside) if ok],
        data=dset.data[inside],
        flat=dset.flat[inside],
    )
    centroid = np.asarray(b1.centroid, dtype=np.float64)
    model_positions = positions[inside]
    return TrackState(
        model=model,
        model_local=model_positions - centroid,
        box_local=b1.vertices - centroid,
        current_points=model_positions.copy(),
        current_model_idx=np.arange(len(model_positions)),
        current_box=b1,
        frame=1,
        prev_image=img,
        lost=False,
    )


def _inflate(box: OrientedBox, factor: float) -> OrientedBox:
    c = np.asarray(box.centroid)
    return OrientedBox(c + (box.vertices - c) * factor)


def step(state: TrackState, next_img: np.ndarray, extractor: DescriptorExtractor,
         cfg: TrackerConfig = TrackerConfig(),
         matcher: MatcherConfig = MatcherConfig(),
         timer=_NULL_TIMER) -> tuple[TrackState, Optional[OrientedBox]]:
    """Advance one frame: flow-track, estimate pose, re-detect, match, merge.

    Returns the new state and the estimated box (None when the pose failed,
    in which case re-detection runs over the whole frame and matches are
    not gated, so later frames can recover).
    """
    with timer.stage("track"):
        if len(state.current_points):
            tracked, lost_flags = lk_track_points(
                state.prev_image, next_img, state.current_points, cfg)
            keep = ~lost_flags
            surv_pts = tracked[keep]
            surv_idx = state.current_model_idx[keep]
        else:
            surv_pts = np.empty((0, 2))
            surv_idx = np.empty(0, dtype=int)
        anchored = surv_idx >= 0
        pose = None
        if int(anchored.sum()) >= cfg.min_inliers:
            corr = np.stack([state.model_local[surv_idx[anchored]],
                             surv_pts[anchored]], axis=1)
            pose = estimate_pose(corr, cfg)

    box = None
    transform = None
    if pose is not None:
        transform, _ = pose
        try:
            box = OrientedBox(transform.apply(state.box_local))
        except ValueError:
            box = None
            transform = None
    lost = box is None

    with timer.stage("detect"):
        keypoints = extractor.detect(next_img)
        timer.note_keypoints(len(keypoints))
        if not lost:
            region = _inflate(box, cfg.redetect_inflation)
            positions = _keypoint_positions(keypoints)
            in_region = points_in_box(positions, region)
            keypoints = [kp for kp, ok in zip(keypoints, in_region) if ok]

    with timer.stage("extract"):
        dset = extractor.extract(next_img, keypoints)

    with timer.stage("match"):
        matches = filter_unambiguous(
            brute_force_match(state.model, dset, matcher))
        det_positions = _keypoint_positions(dset.keypoints)
        matched: dict[int, np.ndarray] = {}
        for m in matches:
            pos = det_positions[m.train_idx]
            if not lost:
                predicted = transform.apply(state.model_local[m.query_idx][None, :])[0]
                if np.hypot(*(pos - predicted)) > cfg.ransac_inlier_px:
                    continue
            matched[m.query_idx] = pos

    # merge flow survivors and fresh matches; a fresh match replaces the
    # flow-tracked position of the same model keypoint
    merged: dict[int, np.ndarray] = {}
    for idx, pos in zip(surv_idx, surv_pts):
        merged[int(idx)] = pos
    merged.update(matched)
    order = sorted(merged)
    cap = extractor.detector.max_features
    order = order[:cap]
    new_points = (np.array([merged[i] for i in order], dtype=np.float64).reshape(-1, 2)
                  if order else np.empty((0, 2)))
    new_idx = np.array(order, dtype=int)

    new_state = replace(
        state,
        current_points=new_points,
        current_model_idx=new_idx,
        current_box=box if box is not None else state.current_box,
        frame=state.frame + 1,
        prev_image=next_img,
        lost=lost,
    )
    return new_state, box


def run_sequence(seq: ImageSequence, extractor: DescriptorExtractor,
                 cfg: TrackerConfig = TrackerConfig(),
                 matcher: MatcherConfig = MatcherConfig()) -> list[Optional[OrientedBox]]:
    """Track frames 2..n starting from the ground-truth box of frame 1.

    Returns one box (or None when lost) per frame after the first.
    Deterministic for fixed inputs and seeds.
    """
    state = init(seq.frames[0], seq.ground_truth[0], extractor, cfg)
    boxes: list[Optional[OrientedBox]] = []
    for frame in seq.frames[1:]:
        state, box = step(state, frame, extractor, cfg, matcher)
        boxes.append(box)
    return boxes
