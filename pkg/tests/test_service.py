"""HTTP service tests: session lifecycle, error mapping, persistence."""

from __future__ import annotations

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from patchmotion import synth
from patchmotion.bvh import parse_bvh, write_bvh
from patchmotion.service import create_app


def _bvh_bytes(raw, motion) -> bytes:
    return write_bvh(raw, motion).encode("utf-8")


@pytest.fixture(scope="module")
def uploads():
    src_raw = synth.biped22_raw()
    tgt_raw = synth.quadruped_raw()
    return {
        "source": _bvh_bytes(src_raw, synth.sinus_motion(src_raw, 60, seed=1)),
        "t0": _bvh_bytes(tgt_raw, synth.random_motion(tgt_raw, 80, seed=0)),
        "t1": _bvh_bytes(tgt_raw, synth.random_motion(tgt_raw, 80, seed=1)),
    }


BINDINGS = {"pairs": [{"target": "Spine", "source": "Spine"},
                      {"target": "Neck", "source": "Neck"},
                      {"target": "Head", "source": "Head"}],
            "bind_root_velocity": True}


@pytest.fixture()
def client():
    return TestClient(create_app())


def make_session(client, uploads, with_bindings=True):
    sid = client.post("/sessions").json()["id"]
    assert client.post(f"/sessions/{sid}/source",
                       files={"file": ("s.bvh", uploads["source"])}
                       ).status_code == 200
    assert client.post(f"/sessions/{sid}/targets",
                       files=[("files", ("t0.bvh", uploads["t0"])),
                              ("files", ("t1.bvh", uploads["t1"]))]
                       ).status_code == 200
    if with_bindings:
        assert client.put(f"/sessions/{sid}/bindings",
                          content=json.dumps(BINDINGS)).status_code == 200
    return sid


def test_session_ids_are_sequential(client):
    assert client.post("/sessions").json()["id"] == "s1"
    assert client.post("/sessions").json()["id"] == "s2"


def test_summary_tracks_uploads(client, uploads):
    sid = make_session(client, uploads)
    body = client.get(f"/sessions/{sid}").json()
    assert body["id"] == sid
    assert body["source"]["frames"] == 60
    assert len(body["source"]["joints"]) == 22
    assert body["target"]["frames"] == 80
    assert body["n_targets"] == 2
    assert body["bindings"]["pairs"] == BINDINGS["pairs"]
    assert body["config"]["alpha"] == 0.85
    assert body["has_result"] is False


def test_autobind_endpoint(client, uploads):
    sid = make_session(client, uploads, with_bindings=False)
    proposals = client.get(f"/sessions/{sid}/autobind",
                           params={"L": 4, "top_k": 3}).json()
    assert 1 <= len(proposals) <= 3
    scores = [p["score"] for p in proposals]
    assert scores == sorted(scores, reverse=True)
    empty = client.get(f"/sessions/{sid}/autobind", params={"top_k": 0})
    assert empty.json() == []


def test_transfer_and_frames_feed(client, uploads):
    sid = make_session(client, uploads)
    job = client.post(f"/sessions/{sid}/transfer").json()
    assert job["job"] == f"{sid}-j1"
    assert job["status"] == "done"
    assert job["frames"] == 60
    assert len(job["energy"]) >= 1

    feed = client.get(f"/sessions/{sid}/result/frames",
                      params={"from": 5, "to": 9}).json()
    assert feed["from"] == 5 and feed["to"] == 9
    for key, n_joints in (("source", 22), ("result", 19), ("target", 19)):
        block = feed[key]
        assert len(block["joints"]) == n_joints
        assert block["frame_time"] == pytest.approx(1.0 / 30.0, rel=1e-4)
        arr = np.asarray(block["frames"])
        assert arr.shape == (4, n_joints, 3)
        assert np.array_equal(arr, np.round(arr, 6))

    bvh = client.get(f"/sessions/{sid}/result/bvh")
    assert bvh.status_code == 200
    assert bvh.headers["content-disposition"].startswith("attachment")
    joints, motion = parse_bvh(bvh.text)
    assert motion.frame_count == 60

    metrics = client.get(f"/sessions/{sid}/metrics").json()
    assert set(metrics) == {"fid", "freq_align", "binding_rate", "energy"}
    assert metrics["binding_rate"] == pytest.approx(200.0 * 3 / 41)


def test_conflicts_before_prerequisites(client, uploads):
    sid = client.post("/sessions").json()["id"]
    res = client.post(f"/sessions/{sid}/transfer")
    assert res.status_code == 409
    assert res.json()["error"] == "MissingInput"
    assert client.get(f"/sessions/{sid}/autobind").status_code == 409

    sid = make_session(client, uploads, with_bindings=False)
    res = client.post(f"/sessions/{sid}/transfer")
    assert res.status_code == 409
    assert res.json()["error"] == "NoBindings"

    client.put(f"/sessions/{sid}/bindings", content=json.dumps(BINDINGS))
    res = client.get(f"/sessions/{sid}/result/frames",
                     params={"from": 0, "to": 5})
    assert res.status_code == 409
    assert res.json()["error"] == "NoResult"


def test_unknown_session_404(client):
    for res in (client.get("/sessions/s99"),
                client.post("/sessions/s99/transfer")):
        assert res.status_code == 404
        assert res.json()["error"] == "UnknownSession"


def test_bad_range_400(client, uploads):
    sid = make_session(client, uploads)
    client.post(f"/sessions/{sid}/transfer")
    for rng in ({"from": -1, "to": 5}, {"from": 7, "to": 3}):
        res = client.get(f"/sessions/{sid}/result/frames", params=rng)
        assert res.status_code == 400
        assert res.json()["error"] == "BadRange"


def test_bad_json_400(client, uploads):
    sid = make_session(client, uploads, with_bindings=False)
    res = client.put(f"/sessions/{sid}/bindings", content="{nope")
    assert res.status_code == 400
    assert res.json()["error"] == "BadJson"
    res = client.put(f"/sessions/{sid}/config", content="[1,2]")
    assert res.status_code == 400
    assert res.json()["error"] == "BadJson"


def test_bad_bvh_upload_400(client):
    sid = client.post("/sessions").json()["id"]
    res = client.post(f"/sessions/{sid}/source",
                      files={"file": ("s.bvh", b"HIERARCHY\nnope")})
    assert res.status_code == 400
    assert res.json()["error"] == "BvhSyntaxError"


def test_domain_errors_are_422_with_name(client, uploads):
    sid = make_session(client, uploads, with_bindings=False)
    bad = {"pairs": [{"target": "Spine", "source": "NoSuchJoint"}]}
    res = client.put(f"/sessions/{sid}/bindings", content=json.dumps(bad))
    assert res.status_code == 422
    assert res.json()["error"] == "UnknownJoint"
    assert "NoSuchJoint" in res.json()["message"]

    src_raw = synth.biped22_raw()
    other = _bvh_bytes(src_raw, synth.sinus_motion(src_raw, 40, seed=2))
    res = client.post(f"/sessions/{sid}/targets",
                      files=[("files", ("x.bvh", other))])
    assert res.status_code == 422
    assert res.json()["error"] == "ShapeMismatch"


def test_config_partial_update(client, uploads):
    sid = make_session(client, uploads)
    res = client.put(f"/sessions/{sid}/config",
                     content=json.dumps({"alpha": 1.0, "iterations": 2}))
    assert res.status_code == 200
    config = res.json()["config"]
    assert config["alpha"] == 1.0
    assert config["iterations"] == 2
    assert config["patch_size"] == 11  # untouched fields keep their values

    res = client.put(f"/sessions/{sid}/config",
                     content=json.dumps({"bogus": 1}))
    assert res.status_code == 400
    assert res.json()["error"] == "UnknownField"

    res = client.put(f"/sessions/{sid}/config",
                     content=json.dumps({"feature_mode": "quaternion"}))
    assert res.status_code == 422
    assert res.json()["error"] == "OutOfRange"


def test_new_inputs_invalidate_result(client, uploads):
    sid = make_session(client, uploads)
    client.post(f"/sessions/{sid}/transfer")
    assert client.get(f"/sessions/{sid}").json()["has_result"] is True
    client.post(f"/sessions/{sid}/source",
                files={"file": ("s.bvh", uploads["source"])})
    assert client.get(f"/sessions/{sid}").json()["has_result"] is False
    res = client.get(f"/sessions/{sid}/result/frames",
                     params={"from": 0, "to": 1})
    assert res.status_code == 409


def test_alpha_one_feed_ignores_seed(client, uploads):
    feeds = []
    for seed in (0, 12345):
        sid = make_session(client, uploads)
        client.put(f"/sessions/{sid}/config",
                   content=json.dumps({"alpha": 1.0, "seed": seed}))
        client.post(f"/sessions/{sid}/transfer")
        res = client.get(f"/sessions/{sid}/result/frames",
                         params={"from": 0, "to": 60})
        feeds.append(res.content)
    assert feeds[0] == feeds[1]


def test_persist_snapshot_and_reload(tmp_path, uploads):
    first = TestClient(create_app(persist_dir=str(tmp_path)))
    sid = make_session(first, uploads)
    job = first.post(f"/sessions/{sid}/transfer").json()
    metrics = first.get(f"/sessions/{sid}/metrics").json()

    files = {p.name for p in (tmp_path / sid).iterdir()}
    assert files == {"meta.json", "source.bvh", "target_00.bvh",
                     "target_01.bvh", "result.bvh"}

    reborn = TestClient(create_app(persist_dir=str(tmp_path)))
    body = reborn.get(f"/sessions/{sid}").json()
    assert body["has_result"] is True
    assert body["n_targets"] == 2
    assert body["bindings"]["pairs"] == BINDINGS["pairs"]

    again = reborn.get(f"/sessions/{sid}/metrics").json()
    assert again["energy"] == pytest.approx(job["energy"])
    assert again["binding_rate"] == metrics["binding_rate"]
    feed = reborn.get(f"/sessions/{sid}/result/frames",
                      params={"from": 0, "to": 3})
    assert feed.status_code == 200

    # the id counter resumes past loaded snapshots
    assert reborn.post("/sessions").json()["id"] == "s2"
