"""Cross-topology motion transfer by masked patch matching.

Retargets a skeletal animation (BVH) from a source character onto a
structurally different target character, given only a handful of bone
correspondences and one or more example motions on the target skeleton.
"""

from .bvh import RawJoint, RawMotion, load_bvh, parse_bvh, save_bvh, write_bvh
from .binding import (BindingPair, BindingProposal, BindingSet, Chain,
                      CorrespondenceMap, align_rest_pose, auto_bind,
                      binding_from_json, binding_to_json, build_map,
                      chain_similarity, enumerate_chains, merge_proposals,
                      minimal_rotation, project_channels)
from .features import (Motion, NormalizationStats, channel_range, decode_motion,
                       encode_motion, feature_width, joint_slice,
                       local_position_features, rotation_from_6d, rotation_to_6d,
                       to_feature_mode)
from .metrics import (binding_rate, contact_consistency, detect_contacts,
                      diversity, dominant_phase, fid, frequency_alignment,
                      kinematic_features, measure_fps)
from .patches import Patch, PatchDatabase, blend, build_database, patchify
from .skeleton import EndSite, Skeleton
from .transfer import (TransferConfig, TransferResult, copy_bound_channels,
                       generate_variants, match_patch, project_source, transfer,
                       transfer_pyramid)
from . import errors

__version__ = "0.1.0"
