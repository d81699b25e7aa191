"""Brute-force descriptor matching with second-best distances and the
ratio-test ambiguity flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .description import BINARY, DescriptorSet

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


@dataclass(frozen=True)
class MatcherConfig:
    rho: float = 0.8
    cross_check: bool = False

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must be in (0, 1]")


@dataclass(frozen=True)
class MatchRecord:
    """One query->train correspondence.

    `second_distance` is None when the train set has a single candidate;
    such matches are treated as unambiguous (the ratio is undefined).
    """

    query_idx: int
    train_idx: int
    best_distance: float
    second_distance: Optional[float]
    ambiguous: bool


def hamming_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Popcount of XOR between two packed binary descriptors."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ValueError(f"descriptor length mismatch: {a.shape} vs {b.shape}")
    return int(_POPCOUNT[a ^ b].sum())


def l2_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two float descriptors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"descriptor dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def _binary_distances(query: np.ndarray, train: np.ndarray) -> np.ndarray:
    out = np.empty((len(query), len(train)), dtype=np.float64)
    for i in range(0, len(query), 256):
        block = query[i:i + 256, None, :] ^ train[None, :, :]
        out[i:i + 256] = _POPCOUNT[block].sum(axis=2, dtype=np.int32)
    return out


def _float_distances(query: np.ndarray, train: np.ndarray) -> np.ndarray:
    out = np.empty((len(query), len(train)), dtype=np.float64)
    for i in range(0, len(query), 64):
        diff = query[i:i + 64, None, :] - train[None, :, :]
        out[i:i + 64] = np.sqrt((diff * diff).sum(axis=2))
    return out


def distance_matrix(query: DescriptorSet, train: DescriptorSet) -> np.ndarray:
    if query.kind != train.kind:
        raise ValueError(f"descriptor kind mismatch: {query.kind} vs {train.kind}")
    if query.kind == BINARY:
        return _binary_distances(query.data, train.data)
    return _float_distances(query.data, train.data)


def _is_ambiguous(best: float, second: Optional[float], rho: float) -> bool:
    if second is None:
        return False
    if second == 0.0:
        return True  # duplicate zero-distance candidates are indistinguishable
    return best / second >= rho


def brute_force_match(
    query: DescriptorSet,
    train: DescriptorSet,
    cfg: MatcherConfig = MatcherConfig(),
) -> list[MatchRecord]:
    """Exhaustive nearest neighbor per query descriptor.

    Ties pick the lowest train index. With `cross_check`, only mutual
    nearest neighbors are kept. Output is sorted by query index.
    """
    if query.kind != train.kind:
        raise ValueError(f"descriptor kind mismatch: {query.kind} vs {train.kind}")
    if len(train) == 0 or len(query) == 0:
        return []
    dist = distance_matrix(query, train)
    best_idx = dist.argmin(axis=1)
    best = dist[np.arange(len(query)), best_idx]
    if dist.shape[1] >= 2:
        second = np.partition(dist, 1, axis=1)[:, 1]
    else:
        second = None
    if cfg.cross_check:
        train_best = dist.argmin(axis=0)
        mutual = train_best[best_idx] == np.arange(len(query))
    else:
        mutual = np.ones(len(query), dtype=bool)
    records = []
    for q in range(len(query)):
        if not mutual[q]:
            continue
        sec = None if second is None else float(second[q])
        b = float(best[q])
        records.append(MatchRecord(
            query_idx=q,
            train_idx=int(best_idx[q]),
            best_distance=b,
            second_distance=sec,
            ambiguous=_is_ambiguous(b, sec, cfg.rho),
        ))
    return records


def filter_unambiguous(matches: list[MatchRecord]) -> list[MatchRecord]:
    """Matches passing the ratio test, original order preserved."""
    return [m for m in matches if not m.ambiguous]
