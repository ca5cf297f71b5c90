"""Temporal patchification, the pooled patch database, and blending.

Motions are cut into overlapping windows of Ps frames ("patches") with a
sliding step; matched patches are merged back by overlap averaging: each
output frame is the arithmetic mean of every patch value covering it,
which is also the least-squares reconstruction from the patch set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoverageGap, EmptyDatabase, ShapeMismatch, TooShort
from .features import Motion, NormalizationStats, to_feature_mode
from .skeleton import Skeleton


@dataclass
class Patch:
    values: np.ndarray  # (Ps, D)
    motion_id: int
    start: int


def patch_count(n_frames: int, patch_size: int, step: int) -> int:
    """Number of start positions 0, step, 2*step, ... with a full window left."""
    return (n_frames - patch_size) // step + 1 if n_frames >= patch_size else 0


def patchify(features: np.ndarray, patch_size: int, step: int = 1,
             motion_id: int = 0) -> list[Patch]:
    """Sliding-window patches of a feature matrix, no padding.

    Raises TooShort when the motion has fewer than patch_size frames.
    """
    n_frames = features.shape[0]
    if n_frames < patch_size:
        raise TooShort(f"motion {motion_id} has {n_frames} frames, need >= {patch_size}")
    count = patch_count(n_frames, patch_size, step)
    return [Patch(features[s:s + patch_size], motion_id, s)
            for s in range(0, count * step, step)]


def blend(patches: list[Patch], n_frames: int) -> np.ndarray:
    """Overlap-average reconstruction of length n_frames.

    Every frame must be covered by at least one patch (CoverageGap
    otherwise). Order of the patch list does not matter.
    """
    if not patches:
        raise CoverageGap("no patches to blend")
    width = patches[0].values.shape[1]
    total = np.zeros((n_frames, width))
    count = np.zeros(n_frames)
    for p in patches:
        stop = p.start + p.values.shape[0]
        total[p.start:stop] += p.values
        count[p.start:stop] += 1.0
    uncovered = np.flatnonzero(count == 0)
    if uncovered.size:
        raise CoverageGap(f"frame {uncovered[0]} covered by no patch")
    return total / count[:, None]


@dataclass
class PatchDatabase:
    """Pooled patches over the target example motions.

    values holds the matching-feature view, blend_values the canonical
    rotation6d view of the same windows (the two coincide when the
    matching mode is rotation6d). Both are stored z-scored with the
    corresponding stats so Eq.-style distances are scale-balanced.
    """

    values: np.ndarray        # (N, Ps, D_match) normalized matching view
    blend_values: np.ndarray  # (N, Ps, D_canonical) normalized rotation view
    motion_ids: np.ndarray    # (N,)
    starts: np.ndarray        # (N,)
    patch_size: int
    step: int
    stats: NormalizationStats        # canonical rotation6d space
    match_stats: NormalizationStats  # matching-feature space
    skeleton: Skeleton
    frame_time: float
    feature_mode: str = "rotation6d"

    def __len__(self) -> int:
        return self.values.shape[0]

    def patch(self, i: int) -> Patch:
        return Patch(self.values[i], int(self.motion_ids[i]), int(self.starts[i]))


def build_database(targets: list[Motion], patch_size: int, step: int = 1,
                   feature_mode: str = "rotation6d",
                   normalize: bool = True) -> PatchDatabase:
    """Patch database pooled over all target motions, deterministic order.

    Stats are fit over all frames of all targets; with normalize=False
    identity stats are used and values stay in raw feature space.
    """
    if not targets:
        raise EmptyDatabase("no target motions given")
    width = targets[0].features.shape[1]
    for i, m in enumerate(targets):
        if m.features.shape[1] != width:
            raise ShapeMismatch(
                f"target motion {i} has width {m.features.shape[1]}, expected {width}")
    canonical = [m.features for m in targets]
    matching = [to_feature_mode(m, feature_mode) for m in targets]

    if normalize:
        stats = NormalizationStats.fit(canonical)
        match_stats = stats if feature_mode == "rotation6d" \
            else NormalizationStats.fit(matching)
    else:
        stats = NormalizationStats.identity(canonical[0].shape[1])
        match_stats = NormalizationStats.identity(matching[0].shape[1])

    match_patches: list[Patch] = []
    blend_patches: list[Patch] = []
    for i, (canon, match) in enumerate(zip(canonical, matching)):
        match_patches += patchify(match_stats.apply(match), patch_size, step, i)
        blend_patches += patchify(stats.apply(canon), patch_size, step, i)

    values = np.stack([p.values for p in match_patches])
    if feature_mode == "rotation6d":
        blend_values = values
    else:
        blend_values = np.stack([p.values for p in blend_patches])
    motion_ids = np.array([p.motion_id for p in match_patches], dtype=np.int64)
    starts = np.array([p.start for p in match_patches], dtype=np.int64)
    return PatchDatabase(values, blend_values, motion_ids, starts,
                         patch_size, step, stats, match_stats,
                         targets[0].skeleton, targets[0].frame_time, feature_mode)
