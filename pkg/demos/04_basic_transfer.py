"""
Retargeting a motion across topologies
======================================

The core workflow: take a walking biped, three sparse bone pairings onto
a quadruped, one example clip of how the quadruped moves, and synthesize
the quadruped performing the biped's motion. No training -- the output is
stitched from patches of the example, chosen to follow the bound joints.
"""

from pathlib import Path

import numpy as np

from patchmotion import (BindingPair, BindingSet, TransferConfig, align_rest_pose,
                         build_database, build_map, decode_motion, encode_motion,
                         load_bvh, save_bvh, transfer)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

src_raw, src_motion = load_bvh(FIXTURES / "biped_walk.bvh")
tgt_raw, tgt_motion = load_bvh(FIXTURES / "quadruped_amble.bvh")
source = encode_motion(src_raw, src_motion)
target = encode_motion(tgt_raw, tgt_motion)
names_s, names_t = source.skeleton.names, target.skeleton.names

# Three pairings: the quadruped's spine/neck/head follow the biped's.
pairs = [("Spine", "Spine"), ("Neck", "Neck"), ("Head", "Head")]
bindings = BindingSet([BindingPair(names_t.index(t), names_s.index(s))
                       for t, s in pairs])

# Rest poses differ (upright torso vs horizontal spine), so each pairing
# gets a rotation that reconciles the two rest directions.
alignments = align_rest_pose(source.skeleton, target.skeleton, bindings)
cmap = build_map(bindings, source.skeleton, target.skeleton,
                 alignments=alignments)
print(f"bound feature channels: {int(cmap.mask.sum())} of {cmap.d_target}")

# The example clip becomes a database of overlapping 11-frame patches.
db = build_database([target], patch_size=11)
print(f"database: {len(db)} patches from {target.n_frames} frames")

# Iterate: match every window of the evolving output against the
# database (bound channels steer, weight alpha), then blend the matched
# patches back together. Energy is the total matching cost per pass.
config = TransferConfig(alpha=0.85, iterations=3, seed=0)
result = transfer(source, db, cmap, config)
print("energy per iteration:", np.round(result.energy, 4))

out = Path(__file__).with_name("retargeted_quadruped.bvh")
save_bvh(out, tgt_raw, decode_motion(result.motion, tgt_raw))
print(f"wrote {result.motion.n_frames} frames -> {out.name}")

# The same run through the command line:
#   patchmotion transfer --source fixtures/biped_walk.bvh \
#       --target fixtures/quadruped_amble.bvh --autobind --out out.bvh
