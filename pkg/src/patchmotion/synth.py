"""Synthetic skeletons and motions.

Deterministic generators used by the test-suite, the bundled fixture
corpus, and the demo scripts: a humanoid, a quadruped, plain chains, and
parametric motions (sinusoidal joint swings, smoothed random poses, and
a marching gait whose stance phases are known by construction).
"""

from __future__ import annotations

import numpy as np

from .bvh import RawJoint, RawMotion
from .features import Motion, encode_motion

ROOT_CHANNELS = ["Xposition", "Yposition", "Zposition",
                 "Zrotation", "Xrotation", "Yrotation"]
ZXY = ["Zrotation", "Xrotation", "Yrotation"]
ZYX = ["Zrotation", "Yrotation", "Xrotation"]
XYZ = ["Xrotation", "Yrotation", "Zrotation"]


class _Builder:
    """Accumulates RawJoints in depth-first order by name references."""

    def __init__(self):
        self.raw: list[RawJoint] = []
        self._index: dict[str, int] = {}

    def joint(self, name: str, parent: str | None, offset, channels) -> str:
        parent_index = None if parent is None else self._index[parent]
        self._index[name] = len(self.raw)
        self.raw.append(RawJoint(name, parent_index, np.asarray(offset, float),
                                 list(channels)))
        return name

    def end(self, parent: str, offset) -> None:
        self.raw.append(RawJoint("End Site", self._index[parent],
                                 np.asarray(offset, float), is_end_site=True))


def chain_raw(n_joints: int, bone_length: float = 1.0,
              channels=ZXY, axis: int = 1) -> list[RawJoint]:
    """A straight chain of n_joints pointing along the given axis."""
    b = _Builder()
    offset = np.zeros(3)
    offset[axis] = bone_length
    b.joint("joint0", None, (0.0, 0.0, 0.0), ROOT_CHANNELS)
    for i in range(1, n_joints):
        b.joint(f"joint{i}", f"joint{i - 1}", offset, channels)
    b.end(f"joint{n_joints - 1}", offset * 0.5)
    return b.raw


def snake_raw(n_joints: int = 12) -> list[RawJoint]:
    """A long horizontal chain (crawler without limbs)."""
    return chain_raw(n_joints, bone_length=0.5, channels=XYZ, axis=2)


def biped22_raw() -> list[RawJoint]:
    """A 22-joint humanoid with LAFAN-style naming, Y-up, ~1.7 units tall."""
    b = _Builder()
    b.joint("Hips", None, (0.0, 0.95, 0.0), ROOT_CHANNELS)
    b.joint("Spine", "Hips", (0.0, 0.12, 0.0), ZXY)
    b.joint("Spine1", "Spine", (0.0, 0.13, 0.0), ZXY)
    b.joint("Spine2", "Spine1", (0.0, 0.13, 0.0), ZXY)
    b.joint("Neck", "Spine2", (0.0, 0.12, 0.0), ZXY)
    b.joint("Head", "Neck", (0.0, 0.10, 0.0), ZXY)
    b.end("Head", (0.0, 0.12, 0.0))
    for side, sx in (("Left", 1.0), ("Right", -1.0)):
        b.joint(f"{side}Shoulder", "Spine2", (sx * 0.08, 0.09, 0.0), ZXY)
        b.joint(f"{side}Arm", f"{side}Shoulder", (sx * 0.12, 0.0, 0.0), ZXY)
        b.joint(f"{side}ForeArm", f"{side}Arm", (sx * 0.28, 0.0, 0.0), ZXY)
        b.joint(f"{side}Hand", f"{side}ForeArm", (sx * 0.26, 0.0, 0.0), ZXY)
        b.end(f"{side}Hand", (sx * 0.08, 0.0, 0.0))
    for side, sx in (("Left", 1.0), ("Right", -1.0)):
        b.joint(f"{side}UpLeg", "Hips", (sx * 0.10, -0.05, 0.0), ZXY)
        b.joint(f"{side}Leg", f"{side}UpLeg", (0.0, -0.42, 0.0), ZXY)
        b.joint(f"{side}Foot", f"{side}Leg", (0.0, -0.40, 0.0), ZXY)
        b.joint(f"{side}Toe", f"{side}Foot", (0.0, -0.06, 0.12), ZXY)
        b.end(f"{side}Toe", (0.0, 0.0, 0.06))
    return b.raw


def quadruped_raw() -> list[RawJoint]:
    """A 19-joint quadruped: horizontal spine, four legs, head and tail."""
    b = _Builder()
    b.joint("Pelvis", None, (0.0, 0.75, 0.0), ROOT_CHANNELS)
    b.joint("Spine", "Pelvis", (0.0, 0.0, 0.30), ZYX)
    b.joint("Chest", "Spine", (0.0, 0.0, 0.30), ZYX)
    b.joint("Neck", "Chest", (0.0, 0.05, 0.20), ZYX)
    b.joint("Head", "Neck", (0.0, 0.10, 0.15), ZYX)
    b.end("Head", (0.0, 0.0, 0.15))
    b.joint("Tail", "Pelvis", (0.0, 0.05, -0.25), ZYX)
    b.joint("Tail1", "Tail", (0.0, 0.0, -0.25), ZYX)
    b.end("Tail1", (0.0, 0.0, -0.2))
    for side, sx in (("Left", 1.0), ("Right", -1.0)):
        b.joint(f"{side}HindLeg", "Pelvis", (sx * 0.18, -0.05, 0.0), ZYX)
        b.joint(f"{side}HindKnee", f"{side}HindLeg", (0.0, -0.35, 0.0), ZYX)
        b.joint(f"{side}HindFoot", f"{side}HindKnee", (0.0, -0.32, 0.0), ZYX)
        b.end(f"{side}HindFoot", (0.0, -0.05, 0.08))
    for side, sx in (("Left", 1.0), ("Right", -1.0)):
        b.joint(f"{side}ForeLeg", "Chest", (sx * 0.16, -0.05, 0.0), ZYX)
        b.joint(f"{side}ForeKnee", f"{side}ForeLeg", (0.0, -0.34, 0.0), ZYX)
        b.joint(f"{side}ForeFoot", f"{side}ForeKnee", (0.0, -0.33, 0.0), ZYX)
        b.end(f"{side}ForeFoot", (0.0, -0.05, 0.08))
    return b.raw


# ---------------------------------------------------------------------------
# Motions
# ---------------------------------------------------------------------------

def _rotation_columns(raw: list[RawJoint]) -> list[int]:
    cols, cursor = [], 0
    for rj in raw:
        for ch in rj.channels:
            if ch.endswith("rotation"):
                cols.append(cursor)
            cursor += 1
    return cols


def sinus_motion(raw: list[RawJoint], n_frames: int, fps: float = 30.0,
                 cycles: float = 4.0, amplitude: float = 25.0,
                 forward_speed: float = 0.02, seed: int = 0) -> RawMotion:
    """Sinusoidal joint swings at a shared frequency with varied phases.

    The root advances along +Z at forward_speed units/frame, so the
    motion has genuine root velocity. Phases and per-channel amplitude
    jitter come from the seeded generator.
    """
    rng = np.random.default_rng(seed)
    width = sum(len(rj.channels) for rj in raw)
    values = np.zeros((n_frames, width))
    t = np.arange(n_frames)
    omega = 2.0 * np.pi * cycles / n_frames
    for col in _rotation_columns(raw):
        amp = amplitude * (0.5 + rng.random())
        phase = rng.uniform(0.0, 2.0 * np.pi)
        values[:, col] = amp * np.sin(omega * t + phase)
    if raw[0].channels[:3] == ["Xposition", "Yposition", "Zposition"]:
        values[:, 2] = forward_speed * t
    return RawMotion(n_frames, 1.0 / fps, values)


def random_motion(raw: list[RawJoint], n_frames: int, fps: float = 30.0,
                  amplitude: float = 20.0, smooth: int = 9,
                  seed: int = 0) -> RawMotion:
    """Moving-average-smoothed random joint angles (non-periodic poses)."""
    rng = np.random.default_rng(seed)
    width = sum(len(rj.channels) for rj in raw)
    values = np.zeros((n_frames, width))
    kernel = np.ones(smooth) / smooth
    for col in _rotation_columns(raw):
        noise = rng.normal(0.0, amplitude, n_frames + smooth - 1)
        values[:, col] = np.convolve(noise, kernel, mode="valid")
    if raw[0].channels[:3] == ["Xposition", "Yposition", "Zposition"]:
        steps = rng.normal(0.0, 0.01, (n_frames, 3))
        values[:, 0:3] = np.cumsum(steps, axis=0)
    return RawMotion(n_frames, 1.0 / fps, values)


def biped_legs_raw() -> list[RawJoint]:
    """Minimal two-legged rig for gait/contact experiments."""
    b = _Builder()
    b.joint("Hips", None, (0.0, 2.2, 0.0), ROOT_CHANNELS)
    b.joint("Spine", "Hips", (0.0, 0.5, 0.0), ZXY)
    b.end("Spine", (0.0, 0.4, 0.0))
    for side, sx in (("Left", 1.0), ("Right", -1.0)):
        b.joint(f"{side}UpLeg", "Hips", (sx * 0.3, -0.1, 0.0), ZXY)
        b.joint(f"{side}Leg", f"{side}UpLeg", (0.0, -1.0, 0.0), ZXY)
        b.joint(f"{side}Foot", f"{side}Leg", (0.0, -1.0, 0.0), ZXY)
        b.end(f"{side}Foot", (0.0, -0.1, 0.2))
    return b.raw


def gait_motion(n_frames: int = 300, period: int = 60, lift: float = 50.0,
                fps: float = 30.0) -> tuple[Motion, dict[str, np.ndarray]]:
    """Marching-in-place gait whose stance windows are known exactly.

    Each leg's hip pitches by lift * max(0, sin) degrees, the two legs in
    antiphase, so a foot is planted (zero velocity, floor height) exactly
    while its half-sine is non-positive. Returns the encoded motion and
    the ground-truth stance track per foot.
    """
    raw = biped_legs_raw()
    width = sum(len(rj.channels) for rj in raw)
    values = np.zeros((n_frames, width))
    t = np.arange(n_frames)
    phase = 2.0 * np.pi * t / period

    col = {}
    cursor = 0
    for rj in raw:
        if not rj.is_end_site and rj.channels:
            col[rj.name] = cursor
        cursor += len(rj.channels)
    # ZXY rotation channels: X is offset 1 from the joint's first column
    values[:, col["LeftUpLeg"] + 1] = lift * np.maximum(0.0, np.sin(phase))
    values[:, col["RightUpLeg"] + 1] = lift * np.maximum(0.0, np.sin(phase + np.pi))

    motion = encode_motion(raw, RawMotion(n_frames, 1.0 / fps, values))
    truth = {
        "LeftFoot": np.sin(phase) <= 0.0,
        "RightFoot": np.sin(phase + np.pi) <= 0.0,
    }
    return motion, truth
