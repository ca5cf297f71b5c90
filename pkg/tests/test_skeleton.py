"""Skeleton/FK tests against a hand-rolled recursive oracle."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from patchmotion import synth
from patchmotion.bvh import parse_bvh
from patchmotion.errors import DegenerateBone, UnknownJoint
from patchmotion.skeleton import Skeleton

from conftest import MINI_BVH


def fk_oracle(skeleton: Skeleton, root_position: np.ndarray,
              rotations: np.ndarray) -> np.ndarray:
    """Single-frame FK written the slow, obviously-correct way."""
    n = skeleton.n_joints
    world_rot = [None] * n
    world_pos = [None] * n
    for j in range(n):
        parent = skeleton.parents[j]
        if parent < 0:
            world_rot[j] = rotations[j]
            world_pos[j] = np.asarray(root_position, dtype=float)
        else:
            world_rot[j] = world_rot[parent] @ rotations[j]
            world_pos[j] = world_pos[parent] + world_rot[parent] @ skeleton.offsets[j]
    return np.stack(world_pos)


def test_from_raw_mini():
    joints, _ = parse_bvh(MINI_BVH)
    sk = Skeleton.from_raw(joints)
    assert sk.names == ["Hips", "Chest"]
    assert list(sk.parents) == [-1, 0]
    np.testing.assert_allclose(sk.offsets[1], [0.0, 0.5, 0.0])
    assert len(sk.end_sites) == 1
    assert sk.end_sites[0].parent == 1
    np.testing.assert_allclose(sk.end_sites[0].offset, [0.0, 0.25, 0.0])
    assert sk.channel_orders[1] == ["Zrotation", "Xrotation", "Yrotation"]


def test_fk_90_degree_hinge():
    joints, _ = parse_bvh(MINI_BVH)
    sk = Skeleton.from_raw(joints)
    rot = np.stack([Rotation.from_euler("z", 90, degrees=True).as_matrix(),
                    np.eye(3)])
    positions, world_rot = sk.fk(np.array([[2.0, 0.0, 0.0]]), rot[None])
    np.testing.assert_allclose(positions[0, 0], [2.0, 0.0, 0.0], atol=1e-12)
    # the (0, 0.5, 0) bone swings to (-0.5, 0, 0) under a 90-degree Z spin
    np.testing.assert_allclose(positions[0, 1], [1.5, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(world_rot[0, 1], rot[0], atol=1e-12)


def test_fk_matches_oracle_random():
    rng = np.random.default_rng(7)
    for raw_fn in (synth.biped22_raw, synth.quadruped_raw,
                   lambda: synth.chain_raw(6)):
        sk = Skeleton.from_raw(raw_fn())
        for _ in range(3):
            frames = 4
            rotations = Rotation.random(frames * sk.n_joints,
                                        random_state=np.random.RandomState(
                                            int(rng.integers(1 << 31)))
                                        ).as_matrix().reshape(frames, sk.n_joints, 3, 3)
            roots = rng.normal(size=(frames, 3))
            positions, _ = sk.fk(roots, rotations)
            for f in range(frames):
                np.testing.assert_allclose(
                    positions[f], fk_oracle(sk, roots[f], rotations[f]),
                    atol=1e-10)


def test_end_site_positions_follow_parent():
    sk = Skeleton.from_raw(synth.biped22_raw())
    rng = np.random.default_rng(3)
    rotations = Rotation.random(2 * sk.n_joints,
                                random_state=np.random.RandomState(5)
                                ).as_matrix().reshape(2, sk.n_joints, 3, 3)
    roots = rng.normal(size=(2, 3))
    positions, world_rot = sk.fk(roots, rotations)
    tips = sk.end_site_positions(positions, world_rot)
    assert tips.shape == (2, len(sk.end_sites), 3)
    for e, site in enumerate(sk.end_sites):
        expected = positions[:, site.parent] + \
            np.einsum("fab,b->fa", world_rot[:, site.parent], site.offset)
        np.testing.assert_allclose(tips[:, e], expected, atol=1e-12)


def test_bone_and_rest_direction():
    sk = Skeleton.from_raw(synth.chain_raw(4, bone_length=2.0))
    assert sk.bone_length(1) == pytest.approx(2.0)
    np.testing.assert_allclose(sk.rest_direction(1), [0.0, 1.0, 0.0])
    # the root has no bone of its own; it borrows the first child direction
    np.testing.assert_allclose(sk.rest_direction(0), [0.0, 1.0, 0.0])


def test_median_bone_length_counts_end_sites():
    joints, _ = parse_bvh(MINI_BVH)
    sk = Skeleton.from_raw(joints)
    # bones: Chest offset (0.5) and the end site (0.25)
    assert sk.median_bone_length() == pytest.approx(0.375)


def test_degenerate_bone_rejected():
    text = MINI_BVH.replace("OFFSET 0.0 0.5 0.0", "OFFSET 0.0 0.0 0.0")
    sk = Skeleton.from_raw(parse_bvh(text)[0])
    with pytest.raises(DegenerateBone):
        sk.rest_direction(1)


def test_depth_and_children():
    sk = Skeleton.from_raw(synth.chain_raw(5))
    assert [sk.depth(j) for j in range(5)] == [0, 1, 2, 3, 4]
    assert sk.children(2) == [3]
    biped = Skeleton.from_raw(synth.biped22_raw())
    hips_children = biped.children(biped.joint_index("Hips"))
    assert len(hips_children) == 3  # spine + two legs


def test_joint_index_unknown():
    sk = Skeleton.from_raw(synth.chain_raw(3))
    with pytest.raises(UnknownJoint):
        sk.joint_index("NotAJoint")
