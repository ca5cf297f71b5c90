"""Regenerate the BVH fixture corpus.

Ten deterministic clips spanning the skeleton shapes the library has to
handle: bipeds at two frame rates, a quadruped, serpentine and plain
kinematic chains under all three Euler orders, a branching tree, and a
gait whose foot contacts are known analytically. Every skeleton has at
least one lineage of four joints so chain enumeration at L = 4 works on
each file.

Run from the repository root:  python3 fixtures/generate.py
"""

from pathlib import Path

from patchmotion.bvh import RawJoint, save_bvh
from patchmotion.features import decode_motion
from patchmotion import synth

HERE = Path(__file__).parent


def tree27_raw() -> list[RawJoint]:
    """Binary tree, 4 levels below the root (31 joints including it)."""
    joints = [RawJoint("Root", None, (0.0, 0.0, 0.0), synth.ROOT_CHANNELS)]
    frontier = [0]
    for level in range(4):
        next_frontier = []
        for parent in frontier:
            for side, dx in (("A", 0.6), ("B", -0.6)):
                index = len(joints)
                name = f"{joints[parent].name}{side}"
                joints.append(RawJoint(name, parent, (dx, 0.8, 0.0), synth.ZXY))
                next_frontier.append(index)
        frontier = next_frontier
    for leaf in frontier:
        joints.append(RawJoint(f"{joints[leaf].name}_end", leaf,
                               (0.0, 0.4, 0.0), [], is_end_site=True))
    return joints


def main() -> None:
    biped = synth.biped22_raw()
    quad = synth.quadruped_raw()

    clips = {
        "biped_walk.bvh": (biped, synth.sinus_motion(biped, 120, seed=2)),
        "biped_fast60.bvh": (biped, synth.sinus_motion(biped, 90, fps=60.0,
                                                       cycles=6, seed=3)),
        "quadruped_amble.bvh": (quad, synth.sinus_motion(quad, 150, seed=4)),
        "quadruped_noise.bvh": (quad, synth.random_motion(quad, 100, seed=5)),
        "snake_wave.bvh": (synth.snake_raw(12),),
        "chain5_zxy.bvh": (synth.chain_raw(5, channels=synth.ZXY),),
        "chain6_zyx.bvh": (synth.chain_raw(6, channels=synth.ZYX),),
        "chain4_xyz.bvh": (synth.chain_raw(4, channels=synth.XYZ),),
        "tree27.bvh": (tree27_raw(),),
    }
    clips["snake_wave.bvh"] += (synth.sinus_motion(clips["snake_wave.bvh"][0],
                                                   140, cycles=3, seed=6),)
    clips["chain5_zxy.bvh"] += (synth.sinus_motion(clips["chain5_zxy.bvh"][0],
                                                   80, seed=7),)
    clips["chain6_zyx.bvh"] += (synth.random_motion(clips["chain6_zyx.bvh"][0],
                                                    75, seed=8),)
    clips["chain4_xyz.bvh"] += (synth.sinus_motion(clips["chain4_xyz.bvh"][0],
                                                   64, cycles=5, seed=9),)
    clips["tree27.bvh"] += (synth.random_motion(clips["tree27.bvh"][0],
                                                110, seed=10),)

    for name, (raw, raw_motion) in clips.items():
        save_bvh(HERE / name, raw, raw_motion)
        print(f"wrote {name}: {len([j for j in raw if not j.is_end_site])} joints, "
              f"{raw_motion.frame_count} frames")

    gait, _ = synth.gait_motion(n_frames=240)
    legs = synth.biped_legs_raw()
    save_bvh(HERE / "gait_legs.bvh", legs, decode_motion(gait, legs))
    print(f"wrote gait_legs.bvh: {gait.n_joints} joints, {gait.n_frames} frames")


if __name__ == "__main__":
    main()
