"""Shared fixtures: the BVH corpus and a few synthetic rigs."""

from __future__ import annotations

from pathlib import Path

import pytest

from patchmotion import synth
from patchmotion.binding import BindingPair, BindingSet, build_map
from patchmotion.bvh import parse_bvh
from patchmotion.features import encode_motion

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# A two-joint rig small enough to hand-check every number against.
MINI_BVH = """HIERARCHY
ROOT Hips
{
\tOFFSET 0.0 1.0 0.0
\tCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
\tJOINT Chest
\t{
\t\tOFFSET 0.0 0.5 0.0
\t\tCHANNELS 3 Zrotation Xrotation Yrotation
\t\tEnd Site
\t\t{
\t\t\tOFFSET 0.0 0.25 0.0
\t\t}
\t}
}
MOTION
Frames: 2
Frame Time: 0.033333
0.0 1.0 0.0 0.0 0.0 0.0 10.0 0.0 0.0
0.1 1.0 0.0 0.0 0.0 0.0 20.0 0.0 0.0
"""


@pytest.fixture(scope="session")
def fixture_paths() -> list[Path]:
    paths = sorted(FIXTURES.glob("*.bvh"))
    assert len(paths) == 10
    return paths


@pytest.fixture(scope="session")
def corpus(fixture_paths):
    """(raw_joints, Motion) per fixture file, parsed once."""
    out = {}
    for path in fixture_paths:
        raw, raw_motion = parse_bvh(path.read_text(encoding="utf-8"))
        out[path.name] = (raw, encode_motion(raw, raw_motion))
    return out


def chain_motion(n_joints: int, n_frames: int, seed: int, cycles: int = 4):
    raw = synth.chain_raw(n_joints)
    return raw, encode_motion(raw, synth.sinus_motion(raw, n_frames, seed=seed,
                                                      cycles=cycles))


def full_identity_binding(n_joints: int) -> BindingSet:
    return BindingSet([BindingPair(j, j) for j in range(n_joints)])


def identity_map(skeleton, feature_mode: str = "rotation6d"):
    bindings = full_identity_binding(skeleton.n_joints)
    return bindings, build_map(bindings, skeleton, skeleton, feature_mode)
