"""Skeleton structure and forward kinematics.

A Skeleton is the channel-free view of a BVH hierarchy: joint names,
parent indices, rest offsets, and per-joint Euler channel orders. End
sites are kept separately so leaf bone directions stay available without
polluting the joint list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bvh import RawJoint, RawMotion
from .errors import DegenerateBone, UnknownJoint

_EPS_BONE = 1e-8


@dataclass
class EndSite:
    parent: int  # joint index (into Skeleton arrays, not the raw list)
    offset: np.ndarray


@dataclass
class Skeleton:
    """Joints in depth-first order; parents[0] == -1 is the single root."""

    names: list[str]
    parents: np.ndarray            # (J,) int, -1 for the root
    offsets: np.ndarray            # (J, 3) rest offsets from parent
    channel_orders: list[list[str]]
    end_sites: list[EndSite] = field(default_factory=list)

    @classmethod
    def from_raw(cls, raw: list[RawJoint]) -> "Skeleton":
        names, parents, offsets, orders = [], [], [], []
        end_sites: list[EndSite] = []
        raw_to_joint: dict[int, int] = {}
        for i, rj in enumerate(raw):
            if rj.is_end_site:
                end_sites.append(EndSite(raw_to_joint[rj.parent], np.asarray(rj.offset, float)))
                continue
            raw_to_joint[i] = len(names)
            names.append(rj.name)
            parents.append(-1 if rj.parent is None else raw_to_joint[rj.parent])
            offsets.append(np.asarray(rj.offset, dtype=np.float64))
            orders.append(list(rj.channels))
        return cls(names, np.array(parents, dtype=np.int64),
                   np.array(offsets, dtype=np.float64), orders, end_sites)

    @property
    def n_joints(self) -> int:
        return len(self.names)

    def joint_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownJoint(f"no joint named '{name}'") from None

    def children(self, j: int) -> list[int]:
        return [c for c in range(self.n_joints) if self.parents[c] == j]

    def bone_length(self, j: int) -> float:
        """Length of the bone from parent(j) to j (the rest offset norm)."""
        return float(np.linalg.norm(self.offsets[j]))

    def rest_direction(self, j: int) -> np.ndarray:
        """Unit rest-pose direction of the bone ending at joint j.

        For the root the direction of its first child's bone is used, so
        every joint has a usable direction for alignment purposes.
        """
        if self.parents[j] < 0:
            kids = self.children(j)
            if not kids:
                raise DegenerateBone("root has no children to define a direction")
            vec = self.offsets[kids[0]]
        else:
            vec = self.offsets[j]
        norm = np.linalg.norm(vec)
        if norm < _EPS_BONE:
            raise DegenerateBone(f"bone into joint {j} ('{self.names[j]}') has zero rest length")
        return vec / norm

    def median_bone_length(self) -> float:
        lengths = [self.bone_length(j) for j in range(self.n_joints) if self.parents[j] >= 0]
        lengths += [float(np.linalg.norm(e.offset)) for e in self.end_sites]
        lengths = [l for l in lengths if l > _EPS_BONE]
        if not lengths:
            raise DegenerateBone("skeleton has no bones of positive length")
        return float(np.median(lengths))

    def depth(self, j: int) -> int:
        d = 0
        while self.parents[j] >= 0:
            j = int(self.parents[j])
            d += 1
        return d

    def fk(self, root_positions: np.ndarray, rotations: np.ndarray
           ) -> tuple[np.ndarray, np.ndarray]:
        """Forward kinematics.

        Inputs:
            root_positions -- (F, 3) world positions of the root joint
            rotations -- (F, J, 3, 3) local rotation matrices
        Output:
            positions -- (F, J, 3) world joint positions
            global_rot -- (F, J, 3, 3) world rotation matrices
        """
        F = rotations.shape[0]
        J = self.n_joints
        positions = np.empty((F, J, 3))
        global_rot = np.empty((F, J, 3, 3))
        for j in range(J):
            p = int(self.parents[j])
            if p < 0:
                positions[:, j] = root_positions
                global_rot[:, j] = rotations[:, j]
            else:
                global_rot[:, j] = global_rot[:, p] @ rotations[:, j]
                positions[:, j] = positions[:, p] + np.einsum(
                    "fab,b->fa", global_rot[:, p], self.offsets[j])
        return positions, global_rot

    def end_site_positions(self, positions: np.ndarray, global_rot: np.ndarray) -> np.ndarray:
        """World positions of end sites given fk() output. (F, E, 3)."""
        if not self.end_sites:
            return np.zeros((positions.shape[0], 0, 3))
        cols = [positions[:, e.parent] + np.einsum("fab,b->fa", global_rot[:, e.parent], e.offset)
                for e in self.end_sites]
        return np.stack(cols, axis=1)


def skeleton_of(raw_joints: list[RawJoint]) -> Skeleton:
    return Skeleton.from_raw(raw_joints)


def world_root_positions(raw: list[RawJoint], motion: RawMotion) -> np.ndarray:
    """Root world positions from the motion's root position channels.

    The root rest offset is added; missing position channels contribute
    the offset alone (a root pinned at its rest location).
    """
    root = raw[0]
    positions = np.tile(np.asarray(root.offset, float), (motion.frame_count, 1))
    axis_of = {"Xposition": 0, "Yposition": 1, "Zposition": 2}
    for c, channel in enumerate(root.channels):
        if channel in axis_of:
            positions[:, axis_of[channel]] += motion.values[:, c]
    return positions
