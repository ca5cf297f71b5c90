"""Sparse joint correspondences between two skeletons.

A BindingSet pairs target joints with source joints (plus a flag for
binding the root-velocity channels). From it we derive the block
correspondence map used to project source features onto the target
layout, the binary mask over target channels, and the rest-pose
alignment rotations that reconcile differing rest conventions.

Also contains the automatic binding search: enumerate fixed-length
upward chains on both skeletons, score all cross pairs by mean bone
direction cosine, and convert the best chain pairs into joint bindings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (DuplicateTarget, IndexOutOfRange, NoChains, OutOfRange,
                     ShapeMismatch)
from .features import rotation_from_6d, rotation_to_6d
from .skeleton import Skeleton

# ---------------------------------------------------------------------------
# Binding sets
# ---------------------------------------------------------------------------


@dataclass
class BindingPair:
    target: int
    source: int
    alignment: Optional[np.ndarray] = None  # 3x3 override; None = derive from rest pose


@dataclass
class BindingSet:
    pairs: list[BindingPair]
    bind_root_velocity: bool = True

    def validate(self, n_source_joints: int, n_target_joints: int) -> None:
        seen = set()
        for p in self.pairs:
            if p.target in seen:
                raise DuplicateTarget(f"target joint {p.target} bound twice")
            seen.add(p.target)
            if not 0 <= p.target < n_target_joints:
                raise IndexOutOfRange(f"target joint {p.target} outside [0, {n_target_joints})")
            if not 0 <= p.source < n_source_joints:
                raise IndexOutOfRange(f"source joint {p.source} outside [0, {n_source_joints})")


def binding_to_json(bindings: BindingSet, source: Skeleton, target: Skeleton) -> dict:
    """Name-based JSON form: {"pairs": [{target, source[, alignment]}], ...}."""
    pairs = []
    for p in bindings.pairs:
        entry = {"target": target.names[p.target], "source": source.names[p.source]}
        if p.alignment is not None:
            entry["alignment"] = np.asarray(p.alignment).tolist()
        pairs.append(entry)
    return {"pairs": pairs, "bind_root_velocity": bindings.bind_root_velocity}


def binding_from_json(data: dict, source: Skeleton, target: Skeleton) -> BindingSet:
    pairs = []
    for entry in data.get("pairs", []):
        alignment = entry.get("alignment")
        pairs.append(BindingPair(
            target.joint_index(entry["target"]),
            source.joint_index(entry["source"]),
            None if alignment is None else np.asarray(alignment, dtype=np.float64),
        ))
    bindings = BindingSet(pairs, bool(data.get("bind_root_velocity", True)))
    bindings.validate(source.n_joints, target.n_joints)
    return bindings


# ---------------------------------------------------------------------------
# Rest-pose alignment
# ---------------------------------------------------------------------------

def minimal_rotation(d_from: np.ndarray, d_to: np.ndarray) -> np.ndarray:
    """Smallest rotation taking unit vector d_from onto unit vector d_to.

    Anti-parallel inputs get a 180-degree turn about a deterministic
    perpendicular: the smallest-index standard basis vector not parallel
    to d_from, orthogonalized against it.
    """
    c = float(np.dot(d_from, d_to))
    if c >= 1.0 - 1e-12:
        return np.eye(3)
    if c <= -1.0 + 1e-12:
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1.0
            residual = e - np.dot(e, d_from) * d_from
            norm = np.linalg.norm(residual)
            if norm > 1e-8:
                axis = residual / norm
                return 2.0 * np.outer(axis, axis) - np.eye(3)
    axis = np.cross(d_from, d_to)
    angle = np.arctan2(np.linalg.norm(axis), c)
    return Rotation.from_rotvec(axis / np.linalg.norm(axis) * angle).as_matrix()


def align_rest_pose(source: Skeleton, target: Skeleton, bindings: BindingSet
                    ) -> list[np.ndarray]:
    """Per-pair alignment rotations (source rest bone dir -> target's).

    Pairs carrying an explicit alignment override keep it verbatim.
    """
    out = []
    for p in bindings.pairs:
        if p.alignment is not None:
            out.append(np.asarray(p.alignment, dtype=np.float64))
        else:
            out.append(minimal_rotation(source.rest_direction(p.source),
                                        target.rest_direction(p.target)))
    return out


# ---------------------------------------------------------------------------
# Correspondence map (the block matrix C and mask m)
# ---------------------------------------------------------------------------

@dataclass
class Block:
    target: slice
    source: slice
    alignment: Optional[np.ndarray] = None  # None = verbatim copy


@dataclass
class CorrespondenceMap:
    blocks: list[Block]
    mask: np.ndarray          # (d_target,) of {0.0, 1.0}
    d_source: int
    d_target: int
    feature_mode: str = "rotation6d"


def build_map(bindings: BindingSet, source: Skeleton, target: Skeleton,
              feature_mode: str = "rotation6d",
              alignments: Optional[list[np.ndarray]] = None) -> CorrespondenceMap:
    """Block correspondence map for the given matching-feature mode.

    rotation6d uses 6-wide rotation blocks at the canonical layout;
    local_position / velocity use 3-wide per-joint position blocks. The
    root-velocity channels [0, 3) map verbatim when bound. Alignment
    rotations (when provided) ride along on the blocks and are applied by
    project_channels.
    """
    bindings.validate(source.n_joints, target.n_joints)
    if alignments is None:
        alignments = [p.alignment for p in bindings.pairs]

    per_joint = 6 if feature_mode == "rotation6d" else 3

    def span(j: int) -> slice:
        return slice(3 + per_joint * j, 3 + per_joint * (j + 1))

    d_source = 3 + per_joint * source.n_joints
    d_target = 3 + per_joint * target.n_joints

    blocks = []
    if bindings.bind_root_velocity:
        blocks.append(Block(slice(0, 3), slice(0, 3)))
    for p, align in zip(bindings.pairs, alignments):
        a = None
        if align is not None and not np.allclose(align, np.eye(3), atol=1e-12):
            a = np.asarray(align, dtype=np.float64)
        blocks.append(Block(span(p.target), span(p.source), a))

    mask = np.zeros(d_target)
    for b in blocks:
        mask[b.target] = 1.0
    return CorrespondenceMap(blocks, mask, d_source, d_target, feature_mode)


def dense_matrix(cmap: CorrespondenceMap) -> np.ndarray:
    """Explicit (d_target, d_source) matrix C; identity blocks only.

    Blocks carrying an alignment rotation are not expressible as a single
    constant matrix acting on 6D codes, so they are rejected here. Used
    by oracle comparisons against project_channels.
    """
    C = np.zeros((cmap.d_target, cmap.d_source))
    for b in cmap.blocks:
        if b.alignment is not None:
            raise ShapeMismatch("dense form undefined for aligned rotation blocks")
        ts, ss = b.target, b.source
        C[ts, ss] = np.eye(ts.stop - ts.start)
    return C


def _conjugate_6d(codes: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Apply R -> A R A^T on a (F, 6) block of rotation codes."""
    r = rotation_from_6d(codes)
    return rotation_to_6d(np.einsum("ab,fbc,dc->fad", a, r, a))


def project_channels(source_features: np.ndarray, cmap: CorrespondenceMap) -> np.ndarray:
    """S (F, d_source) -> (F, d_target); bound blocks copied, rest zero.

    Rotation blocks with an alignment rotation A are conjugated (A R A^T);
    3-wide blocks are rotated (A v); root velocity copies verbatim.
    """
    if source_features.ndim != 2 or source_features.shape[1] != cmap.d_source:
        raise ShapeMismatch(
            f"source features width {source_features.shape[-1]}, map expects {cmap.d_source}")
    out = np.zeros((source_features.shape[0], cmap.d_target))
    for b in cmap.blocks:
        block = source_features[:, b.source]
        if b.alignment is None:
            out[:, b.target] = block
        elif b.target.stop - b.target.start == 6:
            out[:, b.target] = _conjugate_6d(block, b.alignment)
        else:
            out[:, b.target] = block @ b.alignment.T
    return out


# ---------------------------------------------------------------------------
# Automatic binding (chain enumeration + cosine ranking)
# ---------------------------------------------------------------------------

@dataclass
class Chain:
    """Upward path of exactly L joints (child first) with bone directions."""

    joints: list[int]
    directions: np.ndarray  # (L, 3) unit vectors


def enumerate_chains(skeleton: Skeleton, length: int) -> list[Chain]:
    """All upward joint paths of exactly `length` nodes, one per start joint."""
    if length < 1:
        raise OutOfRange("chain length must be >= 1")
    chains = []
    for j in range(skeleton.n_joints):
        path = [j]
        while len(path) < length and skeleton.parents[path[-1]] >= 0:
            path.append(int(skeleton.parents[path[-1]]))
        if len(path) == length:
            dirs = np.stack([skeleton.rest_direction(k) for k in path])
            chains.append(Chain(path, dirs))
    return chains


def chain_similarity(a: Chain, b: Chain) -> float:
    """Mean position-wise cosine between the two chains' bone directions."""
    if len(a.joints) != len(b.joints):
        raise ShapeMismatch("chains differ in length")
    return float(np.mean(np.sum(a.directions * b.directions, axis=1)))


@dataclass
class BindingProposal:
    bindings: BindingSet
    score: float


def auto_bind(source: Skeleton, target: Skeleton, length: int = 4,
              top_k: int = 5, bind_root_velocity: bool = True) -> list[BindingProposal]:
    """Ranked binding proposals from the best-matching chain pairs.

    Every (source chain, target chain) pair is scored by chain_similarity
    and sorted by descending score with ties broken by the lower
    (source chain index, target chain index). The best top_k pairs become
    proposals binding their joints position-wise; a target joint claimed
    by a higher-ranked proposal is dropped from the lower-ranked ones.
    """
    source_chains = enumerate_chains(source, length)
    target_chains = enumerate_chains(target, length)
    if not source_chains or not target_chains:
        raise NoChains(f"no upward paths of length {length} on one of the skeletons")

    scored = []
    for si, sc in enumerate(source_chains):
        for ti, tc in enumerate(target_chains):
            scored.append((-chain_similarity(sc, tc), si, ti))
    scored.sort()

    proposals = []
    claimed: set[int] = set()
    for neg_score, si, ti in scored[:max(top_k, 0)]:
        sc, tc = source_chains[si], target_chains[ti]
        pairs = [BindingPair(t, s) for t, s in zip(tc.joints, sc.joints)
                 if t not in claimed]
        if not pairs:
            continue
        claimed.update(p.target for p in pairs)
        proposals.append(BindingProposal(
            BindingSet(pairs, bind_root_velocity), -neg_score))
    return proposals


def merge_proposals(proposals: list[BindingProposal],
                    bind_root_velocity: bool = True) -> BindingSet:
    """Union of proposal pairs as one BindingSet (targets already unique)."""
    pairs = [p for prop in proposals for p in prop.bindings.pairs]
    if not pairs:
        raise NoChains("no binding pairs to merge")
    return BindingSet(pairs, bind_root_velocity)
