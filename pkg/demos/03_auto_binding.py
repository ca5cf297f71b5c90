"""
Automatic bone correspondences
==============================

Retargeting needs a handful of joint pairings between the two rigs. When
the user provides none, the library walks bone chains of both skeletons,
compares their normalized length profiles, and proposes the best-matching
pairs. Here: a 22-joint biped against a 19-joint quadruped.
"""

from pathlib import Path

from patchmotion import (Skeleton, auto_bind, binding_to_json, chain_similarity,
                         enumerate_chains, load_bvh, merge_proposals)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

biped, _ = load_bvh(FIXTURES / "biped_walk.bvh")
quad, _ = load_bvh(FIXTURES / "quadruped_amble.bvh")
source = Skeleton.from_raw(biped)
target = Skeleton.from_raw(quad)

# Every path of 4 consecutive joints (leaf-ward to root-ward) is a chain.
chains_src = enumerate_chains(source, 4)
chains_tgt = enumerate_chains(target, 4)
print(f"chains: {len(chains_src)} in the biped, {len(chains_tgt)} "
      f"in the quadruped")

# Chains are compared by their bone-length profiles, scale-normalized,
# so a long leg matches a long leg regardless of absolute size.
a, b = chains_src[0], chains_tgt[0]
print(f"sample pair similarity: {chain_similarity(a, b):.3f}  "
      f"({'/'.join(source.names[j] for j in a.joints)} vs "
      f"{'/'.join(target.names[j] for j in b.joints)})")

# auto_bind ranks whole-chain pairings and returns disjoint proposals.
proposals = auto_bind(source, target, length=4, top_k=5)
for k, proposal in enumerate(proposals):
    names = [(target.names[p.target], source.names[p.source])
             for p in proposal.bindings.pairs]
    print(f"proposal {k}: score={proposal.score:.3f}  "
          + ", ".join(f"{t}<-{s}" for t, s in names))

# Merged into one sparse binding set, ready for transfer. The JSON form
# is what the CLI and the HTTP service exchange.
bindings = merge_proposals(proposals)
print("merged:", binding_to_json(bindings, source, target))
