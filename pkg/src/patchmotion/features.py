"""Motion feature codec.

A motion is a dense (F, D) float matrix with D = 3 + 6*J:

    columns [0, 3)              world-frame root velocity (units/frame)
    columns [3+6j, 3+6j+6)      joint j local rotation, 6D representation

The 6D rotation code is the first two columns of the rotation matrix;
decoding re-orthonormalizes with Gram-Schmidt, so blended or averaged
codes still decode to proper rotations. Root velocity uses the forward
difference v[f] = p[f+1] - p[f], with the last row repeated so every
frame has a value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .bvh import RawJoint, RawMotion
from .errors import (ChannelMismatch, DegenerateInput, EmptyMotion, GimbalWarning,
                     NotARotation, OutOfRange)
from .skeleton import Skeleton, world_root_positions

ROOT_VELOCITY = slice(0, 3)

_AXIS_OF = {"Xrotation": "X", "Yrotation": "Y", "Zrotation": "Z"}
_POS_AXIS = {"Xposition": 0, "Yposition": 1, "Zposition": 2}


def feature_width(n_joints: int) -> int:
    return 3 + 6 * n_joints


def joint_slice(j: int) -> slice:
    """Feature columns of joint j's rotation block (unchecked)."""
    return slice(3 + 6 * j, 3 + 6 * j + 6)


def channel_range(j: int, n_joints: int) -> slice:
    """Feature columns of joint j's rotation block, bounds-checked."""
    if not 0 <= j < n_joints:
        raise OutOfRange(f"joint {j} outside [0, {n_joints})")
    return joint_slice(j)


# ---------------------------------------------------------------------------
# 6D rotation representation
# ---------------------------------------------------------------------------

def rotation_to_6d(matrices: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    """(..., 3, 3) rotation matrices -> (..., 6) first-two-column codes.

    Raises NotARotation when an input fails the orthonormality check.
    """
    m = np.asarray(matrices, dtype=np.float64)
    gram = np.einsum("...ij,...kj->...ik", m, m)
    if not np.allclose(gram, np.eye(3), atol=atol) or np.any(np.linalg.det(m) < 0):
        raise NotARotation("input matrix is not a proper rotation")
    return np.concatenate([m[..., :, 0], m[..., :, 1]], axis=-1)


def rotation_from_6d(codes: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """(..., 6) codes -> (..., 3, 3) via Gram-Schmidt orthonormalization.

    Raises DegenerateInput when the first vector (or the residual of the
    second) is too short to normalize.
    """
    x = np.asarray(codes, dtype=np.float64)
    a1, a2 = x[..., 0:3], x[..., 3:6]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    if np.any(n1 < eps):
        raise DegenerateInput("6D code has near-zero first column")
    b1 = a1 / n1
    proj = np.sum(b1 * a2, axis=-1, keepdims=True)
    r2 = a2 - proj * b1
    n2 = np.linalg.norm(r2, axis=-1, keepdims=True)
    if np.any(n2 < eps):
        raise DegenerateInput("6D code columns are colinear")
    b2 = r2 / n2
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=-1)


# ---------------------------------------------------------------------------
# Euler bridging (BVH channel order == intrinsic composition order)
# ---------------------------------------------------------------------------

def rotation_order(channels: list[str]) -> str:
    """'ZXY'-style order string from a joint's channel list."""
    return "".join(_AXIS_OF[c] for c in channels if c in _AXIS_OF)


def matrices_from_euler(order: str, angles_deg: np.ndarray) -> np.ndarray:
    """Euler angles (degrees, shape (F, len(order))) to rotation matrices."""
    if not order:
        return np.tile(np.eye(3), (len(angles_deg), 1, 1))
    return Rotation.from_euler(order, angles_deg, degrees=True).as_matrix()


def euler_from_matrices(order: str, matrices: np.ndarray) -> np.ndarray:
    """Rotation matrices to Euler angles (degrees) for a 3-axis order.

    Emits GimbalWarning instead of scipy's generic warning when the
    decomposition hits a gimbal-locked configuration.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        angles = Rotation.from_matrix(matrices).as_euler(order, degrees=True)
    for w in caught:
        if "gimbal" in str(w.message).lower():
            warnings.warn(f"gimbal lock while decomposing to '{order}' angles",
                          GimbalWarning, stacklevel=2)
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return angles


_PAD_AXES = "XYZ"


def _padded_order(order: str) -> str:
    return order + "".join(a for a in _PAD_AXES if a not in order)


# ---------------------------------------------------------------------------
# Motion container and BVH bridging
# ---------------------------------------------------------------------------

@dataclass
class Motion:
    """A skeleton plus its (F, D) feature matrix.

    root_start is the first-frame world root position, kept so decoding
    back to BVH reproduces the original trajectory instead of one that
    merely has the right shape.
    """

    skeleton: Skeleton
    features: np.ndarray
    frame_time: float
    root_start: np.ndarray

    @property
    def n_frames(self) -> int:
        return self.features.shape[0]

    @property
    def n_joints(self) -> int:
        return self.skeleton.n_joints

    def with_features(self, features: np.ndarray) -> "Motion":
        return replace(self, features=features)

    def rotations(self) -> np.ndarray:
        """(F, J, 3, 3) local rotation matrices decoded from the features."""
        codes = self.features[:, 3:].reshape(self.n_frames, self.n_joints, 6)
        return rotation_from_6d(codes)

    def root_positions(self) -> np.ndarray:
        """(F, 3) world root positions integrated from the velocity block."""
        return integrate_root_velocity(self.features[:, ROOT_VELOCITY], self.root_start)

    def fk(self) -> np.ndarray:
        """(F, J, 3) world joint positions."""
        return self.skeleton.fk(self.root_positions(), self.rotations())[0]


def integrate_root_velocity(velocity: np.ndarray, start: np.ndarray) -> np.ndarray:
    positions = np.empty((velocity.shape[0], 3))
    positions[0] = start
    if velocity.shape[0] > 1:
        positions[1:] = start + np.cumsum(velocity[:-1], axis=0)
    return positions


def encode_motion(raw_joints: list[RawJoint], raw_motion: RawMotion) -> Motion:
    """BVH-level data to a Motion with (F, 3 + 6J) features."""
    if raw_motion.frame_count < 1:
        raise EmptyMotion("cannot encode a motion with no frames")
    skeleton = Skeleton.from_raw(raw_joints)
    F = raw_motion.frame_count
    features = np.zeros((F, feature_width(skeleton.n_joints)))

    root_pos = world_root_positions(raw_joints, raw_motion)
    if F > 1:
        features[:-1, ROOT_VELOCITY] = np.diff(root_pos, axis=0)
        features[-1, ROOT_VELOCITY] = features[-2, ROOT_VELOCITY]

    cursor = 0
    j = 0
    for rj in raw_joints:
        if rj.is_end_site:
            continue
        rot_cols = [cursor + c for c, ch in enumerate(rj.channels) if ch in _AXIS_OF]
        order = rotation_order(rj.channels)
        if rot_cols:
            angles = raw_motion.values[:, rot_cols]
            matrices = matrices_from_euler(order, angles)
        else:
            matrices = np.tile(np.eye(3), (F, 1, 1))
        features[:, joint_slice(j)] = rotation_to_6d(matrices)
        cursor += len(rj.channels)
        j += 1
    return Motion(skeleton, features, raw_motion.frame_time, root_pos[0].copy())


def decode_motion(motion: Motion, raw_joints: list[RawJoint]) -> RawMotion:
    """Motion back to BVH channel values for the given hierarchy.

    The hierarchy must be the one the motion's skeleton was built from
    (same joints in the same order). Root position channels receive the
    integrated trajectory; position channels on other joints are written
    as zero, i.e. bones stay at their rest offsets. Joints whose rotation
    channels list fewer than three axes get the leading angles of a padded
    decomposition, which loses any rotation outside those axes.
    """
    names = [rj.name for rj in raw_joints if not rj.is_end_site]
    if names != motion.skeleton.names:
        raise ChannelMismatch("hierarchy does not match the motion's skeleton")

    F = motion.n_frames
    width = sum(len(rj.channels) for rj in raw_joints)
    values = np.zeros((F, width))
    root_pos = motion.root_positions()
    rotations = motion.rotations()

    cursor = 0
    j = 0
    for rj in raw_joints:
        if rj.is_end_site:
            continue
        order = rotation_order(rj.channels)
        angles = None
        if order:
            full = order if len(order) == 3 else _padded_order(order)
            angles = euler_from_matrices(full, rotations[:, j])
        rot_seen = 0
        for c, ch in enumerate(rj.channels):
            col = cursor + c
            if ch in _POS_AXIS:
                if rj.parent is None:
                    axis = _POS_AXIS[ch]
                    values[:, col] = root_pos[:, axis] - rj.offset[axis]
                # non-root position channels stay zero
            else:
                values[:, col] = angles[:, rot_seen]
                rot_seen += 1
        cursor += len(rj.channels)
        j += 1
    return RawMotion(F, motion.frame_time, values)


# ---------------------------------------------------------------------------
# Alternative matching views of a motion (matching-feature modes)
# ---------------------------------------------------------------------------

FEATURE_MODES = ("rotation6d", "local_position", "velocity")


def local_position_features(motion: Motion) -> np.ndarray:
    """(F, 3 + 3J) view: root velocity plus root-relative joint positions."""
    positions = motion.fk()
    rel = positions - positions[:, 0:1, :]
    out = np.zeros((motion.n_frames, 3 + 3 * motion.n_joints))
    out[:, ROOT_VELOCITY] = motion.features[:, ROOT_VELOCITY]
    out[:, 3:] = rel.reshape(motion.n_frames, -1)
    return out


def to_feature_mode(motion: Motion, mode: str) -> np.ndarray:
    """Matching-feature matrix of a motion in the requested mode.

    rotation6d returns the canonical features; local_position returns
    root-relative FK positions (root velocity kept in [0, 3)); velocity
    returns the forward difference of the local-position view, last row
    repeated.
    """
    if mode == "rotation6d":
        return motion.features.copy()
    if mode == "local_position":
        return local_position_features(motion)
    if mode == "velocity":
        local = local_position_features(motion)
        out = np.zeros_like(local)
        if local.shape[0] > 1:
            out[:-1] = np.diff(local, axis=0)
            out[-1] = out[-2]
        return out
    raise OutOfRange(f"unknown feature mode '{mode}', expected one of {FEATURE_MODES}")


# ---------------------------------------------------------------------------
# Per-channel normalization
# ---------------------------------------------------------------------------

@dataclass
class NormalizationStats:
    """Per-channel mean/std over a motion set; std floored at 1e-6."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, feature_matrices: list[np.ndarray]) -> "NormalizationStats":
        stacked = np.concatenate(feature_matrices, axis=0)
        mean = stacked.mean(axis=0)
        std = np.maximum(stacked.std(axis=0), 1e-6)
        return cls(mean, std)

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std

    def invert(self, features: np.ndarray) -> np.ndarray:
        return features * self.std + self.mean

    @classmethod
    def identity(cls, width: int) -> "NormalizationStats":
        return cls(np.zeros(width), np.ones(width))
