"""Command-line interface.

Subcommands:
    transfer  -- retarget a source BVH onto a target skeleton
    autobind  -- print ranked chain-correspondence proposals as JSON
    metrics   -- run the evaluation protocol and print a JSON report
    serve     -- start the local HTTP service (backend for the browser UI)

Exit codes: 0 success, 2 parse/usage errors, 3 binding errors,
4 transfer/evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import errors
from .binding import (align_rest_pose, auto_bind, binding_from_json, binding_to_json,
                      build_map, merge_proposals)
from .bvh import load_bvh, save_bvh
from .features import Motion, decode_motion, encode_motion
from .metrics import (binding_rate, contact_consistency, detect_contacts, diversity,
                      fid, frequency_alignment, measure_fps)
from .transfer import TransferConfig, transfer_pyramid

_PARSE_ERRORS = (errors.BvhSyntaxError, errors.ChannelMismatch, errors.EmptyMotion,
                 json.JSONDecodeError, OSError, UnicodeDecodeError)
_BINDING_ERRORS = (errors.DuplicateTarget, errors.IndexOutOfRange, errors.UnknownJoint,
                   errors.NoChains, errors.DegenerateBone, KeyError)
_TRANSFER_ERRORS = (errors.TooShort, errors.EmptyDatabase, errors.CoverageGap,
                    errors.ShapeMismatch, errors.DegenerateInput, errors.NotARotation,
                    errors.LengthMismatch, errors.OutOfRange, errors.InsufficientWindows,
                    errors.TooFew, errors.NoBoundChannels, errors.FlatSignal)


def _load_motion(path: str) -> tuple[list, Motion]:
    raw, raw_motion = load_bvh(path)
    return raw, encode_motion(raw, raw_motion)


def _resolve_bindings(args, source_motion: Motion, target_motion: Motion):
    if getattr(args, "bindings", None):
        data = json.loads(Path(args.bindings).read_text(encoding="utf-8"))
        return binding_from_json(data, source_motion.skeleton, target_motion.skeleton)
    proposals = auto_bind(source_motion.skeleton, target_motion.skeleton,
                          args.chain_length, args.top_k)
    return merge_proposals(proposals)


def _config_from(args) -> TransferConfig:
    return TransferConfig(alpha=args.alpha, patch_size=args.patch, step=args.step,
                          iterations=args.iters, pyramid_levels=args.pyramid,
                          feature_mode=args.feature_mode, seed=args.seed,
                          normalize=not args.no_normalize)


def _maps(source_motion, target_motion, bindings, feature_mode):
    aligns = align_rest_pose(source_motion.skeleton, target_motion.skeleton, bindings)
    cmap = build_map(bindings, source_motion.skeleton, target_motion.skeleton,
                     alignments=aligns)
    match_map = None
    if feature_mode != "rotation6d":
        match_map = build_map(bindings, source_motion.skeleton,
                              target_motion.skeleton, feature_mode,
                              alignments=aligns)
    return cmap, match_map


def _run_variants(source_motion, targets, cmap, match_map, config, count):
    results = []
    for k in range(count):
        results.append(transfer_pyramid(source_motion, targets, cmap,
                                        replace(config, seed=config.seed + k),
                                        match_map))
    return results


def cmd_transfer(args) -> int:
    source_raw, source_motion = _load_motion(args.source)
    target_data = [_load_motion(p) for p in args.target]
    target_raw = target_data[0][0]
    targets = [m for _, m in target_data]

    bindings = _resolve_bindings(args, source_motion, targets[0])
    cmap, match_map = _maps(source_motion, targets[0], bindings, args.feature_mode)
    config = _config_from(args)

    results = _run_variants(source_motion, targets, cmap, match_map,
                            config, args.variants)

    out = Path(args.out)
    written = []
    for k, res in enumerate(results):
        path = out if args.variants == 1 else \
            out.with_name(f"{out.stem}_v{k}{out.suffix or '.bvh'}")
        save_bvh(path, target_raw, decode_motion(res.motion, target_raw))
        written.append(str(path))

    report = {
        "outputs": written,
        "energy": [res.energy for res in results],
        "metrics": {
            "frequency_alignment": frequency_alignment(
                source_motion, results[0].motion, cmap),
            "diversity": diversity([r.motion for r in results])
            if len(results) >= 2 else None,
            "binding_rate": binding_rate(bindings, source_motion.n_joints,
                                         targets[0].n_joints),
        },
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_autobind(args) -> int:
    _, source_motion = _load_motion(args.source)
    _, target_motion = _load_motion(args.target)
    if args.top_k <= 0:
        print("[]")
        return 0
    proposals = auto_bind(source_motion.skeleton, target_motion.skeleton,
                          args.chain_length, args.top_k)
    payload = [{"pairs": binding_to_json(p.bindings, source_motion.skeleton,
                                         target_motion.skeleton)["pairs"],
                "score": p.score}
               for p in proposals]
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_metrics(args) -> int:
    _, source_motion = _load_motion(args.source)
    target_data = [_load_motion(p) for p in args.target]
    targets = [m for _, m in target_data]

    bindings = _resolve_bindings(args, source_motion, targets[0])
    cmap, match_map = _maps(source_motion, targets[0], bindings, args.feature_mode)
    config = _config_from(args)

    results = _run_variants(source_motion, targets, cmap, match_map,
                            config, max(args.variants, 2))
    variant_motions = [r.motion for r in results]

    try:
        fid_value = fid(targets, variant_motions)
    except errors.InsufficientWindows as exc:
        print(f"fid skipped: {exc}", file=sys.stderr)
        fid_value = None

    contact = None
    if args.contacts:
        pairing = [tuple(pair.split(":")) for pair in args.contacts.split(",")]
        src_track = detect_contacts(source_motion, [p[0] for p in pairing])
        res_track = detect_contacts(variant_motions[0], [p[1] for p in pairing])
        contact = contact_consistency(src_track, res_track, pairing)

    fps = measure_fps(
        lambda: transfer_pyramid(source_motion, targets, cmap, config, match_map),
        source_motion.n_frames)

    report = {
        "fid": fid_value,
        "freq_align": frequency_alignment(source_motion, variant_motions[0], cmap),
        "contact_consistency": contact,
        "diversity": diversity(variant_motions),
        "binding_rate": binding_rate(bindings, source_motion.n_joints,
                                     targets[0].n_joints),
        "fps": fps,
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_serve(args) -> int:
    from .service import run_service  # deferred: pulls in the HTTP stack
    run_service(port=args.port, static_dir=args.static, persist_dir=args.persist)
    return 0


def _add_transfer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", required=True, help="source BVH file")
    p.add_argument("--target", required=True, action="append",
                   help="target example BVH file (repeatable)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--bindings", help="binding JSON file")
    group.add_argument("--autobind", action="store_true",
                       help="derive bindings from chain similarity")
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--patch", type=int, default=11, help="patch size in frames")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--pyramid", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feature-mode", default="rotation6d",
                   choices=["rotation6d", "local_position", "velocity"])
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--chain-length", type=int, default=4)
    p.add_argument("--top-k", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchmotion",
        description="Cross-topology motion transfer by masked patch matching")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transfer", help="retarget a source motion")
    _add_transfer_flags(t)
    t.add_argument("--variants", type=int, default=1)
    t.add_argument("--out", required=True, help="output BVH path")
    t.set_defaults(func=cmd_transfer)

    a = sub.add_parser("autobind", help="rank chain correspondences")
    a.add_argument("--source", required=True)
    a.add_argument("--target", required=True)
    a.add_argument("--chain-length", type=int, default=4)
    a.add_argument("--top-k", type=int, default=5)
    a.set_defaults(func=cmd_autobind)

    m = sub.add_parser("metrics", help="evaluation report for a transfer")
    _add_transfer_flags(m)
    m.add_argument("--variants", type=int, default=5)
    m.add_argument("--contacts",
                   help="comma-separated SourceJoint:TargetJoint contact pairs")
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("serve", help="run the local HTTP service")
    s.add_argument("--port", type=int, default=7842)
    s.add_argument("--static", help="directory of UI assets to serve at /")
    s.add_argument("--persist", help="directory for session snapshots")
    s.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _BINDING_ERRORS as exc:
        print(f"binding error: {exc}", file=sys.stderr)
        return 3
    except _PARSE_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except _TRANSFER_ERRORS as exc:
        print(f"transfer error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
