"""Iterative masked patch matching and blending.

The source motion is projected onto the target channel layout (bound
channels copied through the correspondence map, unbound channels seeded
with Gaussian noise), then refined by repeatedly matching every temporal
window of the estimate against the target patch database under the
masked two-term cost

    cost = alpha * MSE(m . P, m . Q) + (1 - alpha) * MSE((1-m) . P, (1-m) . Q)

and blending the matched patches back by overlap averaging. Bound query
channels are re-imposed from the projected source at the start of every
iteration, so matching stays anchored to the source while the output
stays on the target-example manifold.

All matching runs in z-scored feature space (stats from the database);
results are de-normalized on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .binding import CorrespondenceMap, project_channels
from .errors import EmptyDatabase, LengthMismatch, ShapeMismatch, TooShort
from .features import Motion, NormalizationStats, to_feature_mode
from .patches import Patch, PatchDatabase, blend, build_database, patchify

_BATCH = 512  # query chunk for the expanded-distance screen


@dataclass
class TransferConfig:
    alpha: float = 0.85
    patch_size: int = 11
    step: int = 1
    iterations: int = 3
    pyramid_levels: int = 3
    feature_mode: str = "rotation6d"
    seed: int = 0
    normalize: bool = True
    keyframe_mask: Optional[np.ndarray] = None  # (F_s,) bool, True = visible


@dataclass
class TransferResult:
    motion: Motion
    energy: list[float] = field(default_factory=list)
    trace: list[list[tuple[int, int, int]]] = field(default_factory=list)
    # trace[i] lists (query start, matched motion id, matched start) per iteration


# ---------------------------------------------------------------------------
# Projection with noise initialization
# ---------------------------------------------------------------------------

def project_source(source: Motion, cmap: CorrespondenceMap, stats: NormalizationStats,
                   seed: int = 0, keyframe_mask: Optional[np.ndarray] = None
                   ) -> np.ndarray:
    """Initial target-layout estimate in normalized feature space.

    Bound channels carry the projected (and normalized) source; unbound
    channels are standard-normal noise from the seeded generator; frames
    marked invisible by keyframe_mask are noise on ALL channels.
    """
    projected = stats.apply(project_channels(source.features, cmap))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(projected.shape)
    m = cmap.mask
    out = m * projected + (1.0 - m) * noise
    if keyframe_mask is not None:
        visible = _check_keyframe_mask(keyframe_mask, source.n_frames)
        out[~visible] = noise[~visible]
    return out


def _check_keyframe_mask(mask: np.ndarray, n_frames: int) -> np.ndarray:
    visible = np.asarray(mask, dtype=bool)
    if visible.shape != (n_frames,):
        raise LengthMismatch(f"keyframe mask length {visible.shape}, motion has {n_frames} frames")
    return visible


# ---------------------------------------------------------------------------
# Masked matching
# ---------------------------------------------------------------------------

def _select_tied(costs: np.ndarray, indices: np.ndarray, db: PatchDatabase) -> int:
    """Index (into `indices`) of the lowest-cost patch, ties broken by
    the lowest (motion id, start frame)."""
    best = costs.min()
    tied = np.flatnonzero(costs == best)
    if tied.size > 1:
        order = np.lexsort((db.starts[indices[tied]], db.motion_ids[indices[tied]]))
        return int(tied[order[0]])
    return int(tied[0])


def match_patch(query: Patch, db: PatchDatabase, mask: np.ndarray, alpha: float
                ) -> tuple[Patch, float]:
    """Exhaustive masked nearest neighbour of one query patch.

    Both MSE terms are normalized by the full patch element count, so the
    mask only gates which residuals enter each term.
    """
    if len(db) == 0:
        raise EmptyDatabase("patch database is empty")
    if query.values.shape != db.values.shape[1:]:
        raise ShapeMismatch(
            f"query shaped {query.values.shape}, database patches {db.values.shape[1:]}")
    d = db.values - query.values[None]
    costs = (alpha * np.mean((mask * d) ** 2, axis=(1, 2))
             + (1.0 - alpha) * np.mean(((1.0 - mask) * d) ** 2, axis=(1, 2)))
    i = _select_tied(costs, np.arange(len(db)), db)
    return db.patch(i), float(costs[i])


def _match_batch(queries: np.ndarray, db: PatchDatabase, mask: np.ndarray,
                 alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nearest database patch for every query window, (M,) indices + costs.

    The two-term cost collapses to a single per-channel weighted squared
    distance with w = alpha*m + (1-alpha)*(1-m); candidates are screened
    with the expanded |P|^2 - 2 P.Q + |Q|^2 form (one matrix product),
    then re-scored with the verbatim expression so that argmin selection
    and tie-breaking are identical to match_patch.
    """
    n, ps, width = db.values.shape
    denominator = ps * width
    w = alpha * mask + (1.0 - alpha) * (1.0 - mask)
    w_flat = np.tile(w, ps)
    v_flat = db.values.reshape(n, -1)
    vw = v_flat * w_flat
    db_sq = np.einsum("ij,ij->i", vw, v_flat)

    m_total = queries.shape[0]
    out_idx = np.empty(m_total, dtype=np.int64)
    out_cost = np.empty(m_total)
    for lo in range(0, m_total, _BATCH):
        hi = min(lo + _BATCH, m_total)
        q_flat = queries[lo:hi].reshape(hi - lo, -1)
        q_sq = np.einsum("ij,ij,j->i", q_flat, q_flat, w_flat)
        approx = (db_sq[:, None] - 2.0 * (vw @ q_flat.T) + q_sq[None, :]) / denominator
        for q in range(hi - lo):
            col = approx[:, q]
            threshold = col.min() + 1e-8
            cand = np.flatnonzero(col <= threshold)
            d = db.values[cand] - queries[lo + q]
            exact = (alpha * np.mean((mask * d) ** 2, axis=(1, 2))
                     + (1.0 - alpha) * np.mean(((1.0 - mask) * d) ** 2, axis=(1, 2)))
            k = _select_tied(exact, cand, db)
            out_idx[lo + q] = cand[k]
            out_cost[lo + q] = exact[k]
    return out_idx, out_cost


# ---------------------------------------------------------------------------
# The iterative transfer loop
# ---------------------------------------------------------------------------

def transfer(source: Motion, db: PatchDatabase, cmap: CorrespondenceMap,
             config: TransferConfig, match_map: Optional[CorrespondenceMap] = None,
             init: Optional[np.ndarray] = None) -> TransferResult:
    """Retarget `source` onto the database's skeleton (one pyramid level).

    `cmap` maps the canonical rotation feature layout; when the config's
    feature_mode is positional/velocity a `match_map` on that layout must
    be supplied as well. `init` (raw canonical target features) replaces
    the noise initialization — used by the pyramid schedule.
    """
    if len(db) == 0:
        raise EmptyDatabase("patch database is empty")
    if source.n_frames < config.patch_size:
        raise TooShort(
            f"source has {source.n_frames} frames, need >= {config.patch_size}")
    if db.feature_mode != config.feature_mode:
        raise ShapeMismatch(
            f"database built for mode '{db.feature_mode}', config wants '{config.feature_mode}'")
    if config.feature_mode != "rotation6d" and match_map is None:
        raise ShapeMismatch("positional/velocity matching requires a match_map")

    n_frames = source.n_frames
    visible = (np.ones(n_frames, dtype=bool) if config.keyframe_mask is None
               else _check_keyframe_mask(config.keyframe_mask, n_frames))

    projected = db.stats.apply(project_channels(source.features, cmap))
    bound = cmap.mask.astype(bool)
    if init is None:
        estimate = project_source(source, cmap, db.stats, config.seed,
                                  config.keyframe_mask)
    else:
        estimate = db.stats.apply(init)
        estimate[np.ix_(visible, bound)] = projected[np.ix_(visible, bound)]

    if config.feature_mode != "rotation6d":
        source_mode = to_feature_mode(source, config.feature_mode)
        projected_mode = db.match_stats.apply(project_channels(source_mode, match_map))
        bound_mode = match_map.mask.astype(bool)
        match_mask = match_map.mask
    else:
        match_mask = cmap.mask

    energy: list[float] = []
    trace: list[list[tuple[int, int, int]]] = []
    for _ in range(config.iterations):
        queries_mat = estimate.copy()
        queries_mat[np.ix_(visible, bound)] = projected[np.ix_(visible, bound)]
        if config.feature_mode != "rotation6d":
            state = Motion(db.skeleton, db.stats.invert(queries_mat),
                           source.frame_time, source.root_start)
            queries_mat = db.match_stats.apply(
                to_feature_mode(state, config.feature_mode))
            queries_mat[np.ix_(visible, bound_mode)] = \
                projected_mode[np.ix_(visible, bound_mode)]

        queries = patchify(queries_mat, config.patch_size, config.step)
        q_values = np.stack([q.values for q in queries])
        idx, costs = _match_batch(q_values, db, match_mask, config.alpha)
        energy.append(float(np.sum(costs)))
        trace.append([(q.start, int(db.motion_ids[i]), int(db.starts[i]))
                      for q, i in zip(queries, idx)])
        matched = [Patch(db.blend_values[i], int(db.motion_ids[i]), q.start)
                   for q, i in zip(queries, idx)]
        estimate = blend(matched, n_frames)

    result = Motion(db.skeleton, db.stats.invert(estimate),
                    source.frame_time, source.root_start.copy())
    return TransferResult(result, energy, trace)


def copy_bound_channels(result: TransferResult, source: Motion,
                        cmap: CorrespondenceMap) -> TransferResult:
    """Variant that overwrites bound output channels with the projected
    source verbatim ("directly copy"); unbound channels untouched."""
    projected = project_channels(source.features, cmap)
    bound = cmap.mask.astype(bool)
    features = result.motion.features.copy()
    features[:, bound] = projected[:, bound]
    return replace(result, motion=result.motion.with_features(features))


# ---------------------------------------------------------------------------
# Inverted pyramid schedule
# ---------------------------------------------------------------------------

def _subsample(motion: Motion, stride: int) -> Motion:
    if stride == 1:
        return motion
    return Motion(motion.skeleton, motion.features[::stride],
                  motion.frame_time * stride, motion.root_start)


def _usable_levels(requested: int, min_frames: int, patch_size: int) -> int:
    levels = 1
    while (levels < requested
           and -(-min_frames // (2 ** levels)) >= patch_size):  # ceil div
        levels += 1
    return levels


def _upsample(coarse: np.ndarray, n_frames: int) -> np.ndarray:
    """Linear interpolation from stride-2 subsampled frames back up."""
    xp = 2.0 * np.arange(coarse.shape[0])
    x = np.arange(n_frames, dtype=np.float64)
    out = np.empty((n_frames, coarse.shape[1]))
    for ch in range(coarse.shape[1]):
        out[:, ch] = np.interp(x, xp, coarse[:, ch])
    return out


def transfer_pyramid(source: Motion, targets: list[Motion], cmap: CorrespondenceMap,
                     config: TransferConfig,
                     match_map: Optional[CorrespondenceMap] = None) -> TransferResult:
    """Coarse-to-fine transfer over stride-2 temporal subsamplings.

    The number of levels is clamped so every motion keeps at least
    patch_size frames at the coarsest level; one level reduces to plain
    transfer(). Each coarse result is linearly upsampled and used as the
    next level's initialization in place of noise (bound channels are
    re-imposed from the projected source inside transfer()).
    """
    min_frames = min([source.n_frames] + [t.n_frames for t in targets])
    levels = _usable_levels(max(config.pyramid_levels, 1), min_frames, config.patch_size)
    if source.n_frames < config.patch_size:
        raise TooShort(
            f"source has {source.n_frames} frames, need >= {config.patch_size}")

    if levels == 1 and config.keyframe_mask is None:
        db = build_database(targets, config.patch_size, config.step,
                            config.feature_mode, config.normalize)
        return transfer(source, db, cmap, config, match_map)

    init_raw: Optional[np.ndarray] = None
    result: Optional[TransferResult] = None
    for level in reversed(range(levels)):
        stride = 2 ** level
        src = _subsample(source, stride)
        level_config = replace(
            config,
            keyframe_mask=None if config.keyframe_mask is None
            else np.asarray(config.keyframe_mask, dtype=bool)[::stride])
        db = build_database([_subsample(t, stride) for t in targets],
                            config.patch_size, config.step,
                            config.feature_mode, config.normalize)
        result = transfer(src, db, cmap, level_config, match_map, init=init_raw)
        if level > 0:
            init_raw = _upsample(result.motion.features,
                                 -(-source.n_frames // (2 ** (level - 1))))
    return result


def generate_variants(source: Motion, db: PatchDatabase, cmap: CorrespondenceMap,
                      config: TransferConfig, count: int,
                      match_map: Optional[CorrespondenceMap] = None
                      ) -> list[TransferResult]:
    """Transfers with seeds seed+0 ... seed+count-1 (diversity protocol)."""
    return [transfer(source, db, cmap, replace(config, seed=config.seed + k),
                     match_map)
            for k in range(count)]
