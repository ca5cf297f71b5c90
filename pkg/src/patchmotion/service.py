"""Local HTTP/JSON service backing the browser binding UI.

Sessions are in-memory (optionally snapshotted to a directory) and each
session serializes its mutations behind a lock, so a transfer can never
race an upload or a binding edit on the same session. The playback feed
ships FK joint positions, not features, so the UI never re-implements
the kinematics or the rotation codec.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, File, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import errors
from .binding import (BindingSet, align_rest_pose, auto_bind, binding_from_json,
                      binding_to_json, build_map)
from .bvh import RawJoint, parse_bvh, write_bvh
from .errors import PatchMotionError
from .features import FEATURE_MODES, Motion, decode_motion, encode_motion
from .metrics import binding_rate, fid, frequency_alignment
from .transfer import TransferConfig, TransferResult, transfer_pyramid

_PARSE_ERRORS = (errors.BvhSyntaxError, errors.ChannelMismatch, errors.EmptyMotion)
_CONFIG_FIELDS = {"alpha", "patch_size", "step", "iterations", "pyramid_levels",
                  "feature_mode", "seed", "normalize", "keyframe_mask"}


@dataclass
class Session:
    sid: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    source_raw: Optional[list[RawJoint]] = None
    source: Optional[Motion] = None
    target_raw: Optional[list[RawJoint]] = None
    targets: list[Motion] = field(default_factory=list)
    bindings: Optional[BindingSet] = None
    config: TransferConfig = field(default_factory=TransferConfig)
    result: Optional[TransferResult] = None
    jobs: int = 0


def _error_body(exc: PatchMotionError) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def _http_error(status: int, name: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": name, "message": message})


class _ApiError(Exception):
    def __init__(self, status: int, name: str, message: str):
        super().__init__(message)
        self.status, self.name = status, name


def _summary(session: Session) -> dict:
    def block(motion: Optional[Motion]):
        if motion is None:
            return None
        sk = motion.skeleton
        return {"joints": list(sk.names),
                "parents": [int(p) for p in sk.parents],
                "frames": motion.n_frames,
                "frame_time": motion.frame_time}

    return {"id": session.sid,
            "source": block(session.source),
            "target": block(session.targets[0] if session.targets else None),
            "n_targets": len(session.targets),
            "bindings": None if session.bindings is None or session.source is None
            else binding_to_json(session.bindings, session.source.skeleton,
                                 session.targets[0].skeleton),
            "config": _config_json(session.config),
            "has_result": session.result is not None}


def _config_json(config: TransferConfig) -> dict:
    data = asdict(config)
    mask = data.pop("keyframe_mask")
    data["keyframe_mask"] = None if mask is None else [bool(v) for v in mask]
    return data


def _config_from_json(data: dict) -> TransferConfig:
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise _ApiError(400, "UnknownField",
                        f"unknown config fields: {sorted(unknown)}")
    if "feature_mode" in data and data["feature_mode"] not in FEATURE_MODES:
        raise errors.OutOfRange(f"feature_mode must be one of {FEATURE_MODES}")
    mask = data.get("keyframe_mask")
    if mask is not None:
        data = dict(data, keyframe_mask=np.asarray(mask, dtype=bool))
    return TransferConfig(**data)


def _decode_upload(data: bytes) -> tuple[list[RawJoint], Motion]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise _ApiError(400, "NotText", "upload is not UTF-8 text")
    raw, raw_motion = parse_bvh(text)
    return raw, encode_motion(raw, raw_motion)


def _positions_block(motion: Motion, lo: int, hi: int) -> dict:
    segment = motion.fk()[lo:hi]
    return {"joints": list(motion.skeleton.names),
            "frame_time": motion.frame_time,
            "frames": np.round(segment, 6).tolist()}


def _transfer_maps(session: Session):
    source_sk = session.source.skeleton
    target_sk = session.targets[0].skeleton
    aligns = align_rest_pose(source_sk, target_sk, session.bindings)
    cmap = build_map(session.bindings, source_sk, target_sk, alignments=aligns)
    match_map = None
    if session.config.feature_mode != "rotation6d":
        match_map = build_map(session.bindings, source_sk, target_sk,
                              session.config.feature_mode, alignments=aligns)
    return cmap, match_map


class SessionStore:
    def __init__(self, persist_dir: Optional[str] = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir is not None:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_snapshots()

    def create(self) -> Session:
        with self._lock:
            session = Session(sid=f"s{next(self._ids)}")
            self._sessions[session.sid] = session
        self.save(session)
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise _ApiError(404, "UnknownSession", f"no session {sid!r}")
        return session

    # -- snapshots ---------------------------------------------------------

    def save(self, session: Session) -> None:
        if self.persist_dir is None:
            return
        root = self.persist_dir / session.sid
        root.mkdir(exist_ok=True)
        meta = {"id": session.sid, "jobs": session.jobs,
                "config": _config_json(session.config),
                "bindings": None,
                "energy": None if session.result is None
                else list(session.result.energy)}
        if session.bindings is not None and session.source is not None:
            meta["bindings"] = binding_to_json(
                session.bindings, session.source.skeleton,
                session.targets[0].skeleton)
        if session.source_raw is not None:
            (root / "source.bvh").write_text(
                write_bvh(session.source_raw,
                          decode_motion(session.source, session.source_raw)),
                encoding="utf-8")
        for i, target in enumerate(session.targets):
            (root / f"target_{i:02d}.bvh").write_text(
                write_bvh(session.target_raw,
                          decode_motion(target, session.target_raw)),
                encoding="utf-8")
        if session.result is not None:
            (root / "result.bvh").write_text(
                write_bvh(session.target_raw,
                          decode_motion(session.result.motion,
                                        session.target_raw)),
                encoding="utf-8")
        (root / "meta.json").write_text(json.dumps(meta, indent=2),
                                        encoding="utf-8")

    def _load_snapshots(self) -> None:
        top = 0
        for root in sorted(self.persist_dir.iterdir()):
            meta_path = root / "meta.json"
            if not meta_path.is_file():
                continue
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            session = Session(sid=meta["id"], jobs=meta.get("jobs", 0),
                              config=_config_from_json(meta.get("config", {})))
            source_path = root / "source.bvh"
            if source_path.is_file():
                session.source_raw, session.source = _decode_upload(
                    source_path.read_bytes())
            for path in sorted(root.glob("target_*.bvh")):
                session.target_raw, motion = _decode_upload(path.read_bytes())
                session.targets.append(motion)
            if meta.get("bindings") is not None and session.source is not None:
                session.bindings = binding_from_json(
                    meta["bindings"], session.source.skeleton,
                    session.targets[0].skeleton)
            result_path = root / "result.bvh"
            if result_path.is_file():
                _, motion = _decode_upload(result_path.read_bytes())
                session.result = TransferResult(motion,
                                                meta.get("energy") or [])
            self._sessions[session.sid] = session
            if session.sid.startswith("s") and session.sid[1:].isdigit():
                top = max(top, int(session.sid[1:]))
        self._ids = itertools.count(top + 1)


def create_app(persist_dir: Optional[str] = None,
               static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="patchmotion service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(persist_dir)
    app.state.store = store

    @app.exception_handler(_ApiError)
    async def api_error(_req: Request, exc: _ApiError):
        return _http_error(exc.status, exc.name, str(exc))

    @app.exception_handler(PatchMotionError)
    async def domain_error(_req: Request, exc: PatchMotionError):
        status = 400 if isinstance(exc, _PARSE_ERRORS) else 422
        return JSONResponse(status_code=status, content=_error_body(exc))

    @app.post("/sessions")
    def create_session():
        return {"id": store.create().sid}

    @app.get("/sessions/{sid}")
    def session_summary(sid: str):
        session = store.get(sid)
        with session.lock:
            return _summary(session)

    @app.post("/sessions/{sid}/source")
    async def upload_source(sid: str, file: UploadFile = File(...)):
        session = store.get(sid)
        data = await file.read()
        with session.lock:
            session.source_raw, session.source = _decode_upload(data)
            session.result = None
            store.save(session)
            return _summary(session)

    @app.post("/sessions/{sid}/targets")
    async def upload_targets(sid: str, files: list[UploadFile] = File(...)):
        session = store.get(sid)
        payloads = [await f.read() for f in files]
        with session.lock:
            for data in payloads:
                raw, motion = _decode_upload(data)
                if session.targets and list(motion.skeleton.names) != \
                        list(session.targets[0].skeleton.names):
                    raise errors.ShapeMismatch(
                        "target example has a different skeleton")
                session.target_raw = session.target_raw or raw
                session.targets.append(motion)
            session.result = None
            store.save(session)
            return _summary(session)

    @app.get("/sessions/{sid}/autobind")
    def autobind(sid: str, L: int = Query(4), top_k: int = Query(5)):
        session = store.get(sid)
        with session.lock:
            if session.source is None or not session.targets:
                raise _ApiError(409, "MissingInput",
                                "upload source and target first")
            if top_k <= 0:
                return []
            proposals = auto_bind(session.source.skeleton,
                                  session.targets[0].skeleton, L, top_k)
            return [{"pairs": binding_to_json(p.bindings,
                                              session.source.skeleton,
                                              session.targets[0].skeleton)["pairs"],
                     "score": p.score}
                    for p in proposals]

    @app.put("/sessions/{sid}/bindings")
    async def put_bindings(sid: str, request: Request):
        session = store.get(sid)
        try:
            data = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise _ApiError(400, "BadJson", str(exc))
        with session.lock:
            if session.source is None or not session.targets:
                raise _ApiError(409, "MissingInput",
                                "upload source and target first")
            bindings = binding_from_json(data, session.source.skeleton,
                                         session.targets[0].skeleton)
            bindings.validate(session.source.n_joints,
                              session.targets[0].n_joints)
            session.bindings = bindings
            session.result = None
            store.save(session)
            return _summary(session)

    @app.put("/sessions/{sid}/config")
    async def put_config(sid: str, request: Request):
        session = store.get(sid)
        try:
            data = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise _ApiError(400, "BadJson", str(exc))
        if not isinstance(data, dict):
            raise _ApiError(400, "BadJson", "config must be a JSON object")
        with session.lock:
            merged = _config_json(session.config)
            merged.update(data)
            session.config = _config_from_json(merged)
            session.result = None
            store.save(session)
            return _summary(session)

    @app.post("/sessions/{sid}/transfer")
    def run_transfer(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.source is None or not session.targets:
                raise _ApiError(409, "MissingInput",
                                "upload source and target first")
            if session.bindings is None:
                raise _ApiError(409, "NoBindings",
                                "set bindings before transfer")
            cmap, match_map = _transfer_maps(session)
            session.result = transfer_pyramid(session.source, session.targets,
                                              cmap, session.config, match_map)
            session.jobs += 1
            store.save(session)
            return {"job": f"{session.sid}-j{session.jobs}",
                    "status": "done",
                    "energy": [float(e) for e in session.result.energy],
                    "frames": session.result.motion.n_frames}

    @app.get("/sessions/{sid}/result/frames")
    def result_frames(sid: str, from_frame: int = Query(..., alias="from"),
                      to: int = Query(...)):
        session = store.get(sid)
        with session.lock:
            if from_frame < 0 or from_frame > to:
                raise _ApiError(400, "BadRange",
                                f"need 0 <= from <= to, got [{from_frame}, {to})")
            if session.result is None:
                raise _ApiError(409, "NoResult", "run transfer first")
            return {"from": from_frame, "to": to,
                    "source": _positions_block(session.source, from_frame, to),
                    "result": _positions_block(session.result.motion,
                                               from_frame, to),
                    "target": _positions_block(session.targets[0],
                                               from_frame, to)}

    @app.get("/sessions/{sid}/result/bvh")
    def result_bvh(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.result is None:
                raise _ApiError(409, "NoResult", "run transfer first")
            text = write_bvh(session.target_raw,
                             decode_motion(session.result.motion,
                                           session.target_raw))
        return Response(content=text, media_type="application/octet-stream",
                        headers={"Content-Disposition":
                                 'attachment; filename="result.bvh"'})

    @app.get("/sessions/{sid}/metrics")
    def session_metrics(sid: str):
        session = store.get(sid)
        with session.lock:
            if session.result is None:
                raise _ApiError(409, "NoResult", "run transfer first")
            cmap, _ = _transfer_maps(session)
            try:
                fid_value = fid(session.targets, [session.result.motion])
            except (errors.InsufficientWindows, errors.TooFew):
                fid_value = None
            return {"fid": fid_value,
                    "freq_align": frequency_alignment(session.source,
                                                      session.result.motion,
                                                      cmap),
                    "binding_rate": binding_rate(session.bindings,
                                                 session.source.n_joints,
                                                 session.targets[0].n_joints),
                    "energy": [float(e) for e in session.result.energy]}

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def run_service(port: int = 7842, static_dir: Optional[str] = None,
                persist_dir: Optional[str] = None) -> None:
    import uvicorn
    uvicorn.run(create_app(persist_dir, static_dir),
                host="127.0.0.1", port=port)
