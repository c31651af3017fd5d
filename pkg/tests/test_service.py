import base64
import hashlib

import numpy as np
import pytest
from fastapi.testclient import TestClient

from atlasrender.env import make_cartpole_env
from atlasrender.service.app import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def decode(payload: dict) -> np.ndarray:
    raw = base64.b64decode(payload["observations"])
    assert hashlib.sha256(raw).hexdigest() == payload["checksum"]
    assert payload["dtype"] == "uint8"
    return np.frombuffer(raw, dtype=np.uint8).reshape(payload["shape"])


def make_env(client, **overrides):
    body = {"scenes": 2, "width": 16, "height": 16}
    body.update(overrides)
    resp = client.post("/envs", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()["env_id"]


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_create_reports_obs_shape(client):
    resp = client.post("/envs", json={"scenes": 3, "width": 32, "height": 16})
    assert resp.status_code == 200
    body = resp.json()
    assert body["obs_shape"] == [3, 16, 32, 4]
    assert body["env_id"]


def test_missing_scenes_is_422_naming_field(client):
    resp = client.post("/envs", json={"width": 16})
    assert resp.status_code == 422
    assert any(e["loc"][-1] == "scenes" for e in resp.json()["detail"])


def test_invalid_scene_count_passes_core_message(client):
    resp = client.post("/envs", json={"scenes": 0})
    assert resp.status_code == 400
    assert resp.json()["detail"] == "scene_count must be ≥ 1"


def test_reset_step_match_local_run(client):
    env_id = make_env(client, scenes=2)
    remote_reset = decode(client.post(f"/envs/{env_id}/reset", json={"seed": 3}).json())

    local = make_cartpole_env(2, 16, 16)
    assert np.array_equal(remote_reset, local.reset(seed=3))

    actions = [1.0, -0.5]
    step = client.post(f"/envs/{env_id}/step", json={"actions": actions}).json()
    local_obs, local_rewards, local_dones = local.step(actions)
    assert np.array_equal(decode(step), local_obs)
    assert step["rewards"] == list(local_rewards)
    assert step["dones"] == list(local_dones)


def test_wrong_action_count_is_400(client):
    env_id = make_env(client, scenes=2)
    client.post(f"/envs/{env_id}/reset", json={"seed": 0})
    resp = client.post(f"/envs/{env_id}/step", json={"actions": [1.0]})
    assert resp.status_code == 400
    assert "expected 2 actions" in resp.json()["detail"]


def test_stats_fields(client):
    env_id = make_env(client, scenes=2)
    client.post(f"/envs/{env_id}/reset", json={"seed": 0})
    stats = client.get(f"/envs/{env_id}/stats").json()
    assert set(stats) == {
        "target_binds", "draw_calls", "instances_drawn",
        "matrix_uploads", "frames_produced",
    }
    assert stats["frames_produced"] == 2


def test_unknown_env_is_404(client):
    assert client.get("/envs/nope/stats").status_code == 404
    assert client.post("/envs/nope/reset", json={}).status_code == 404


def test_delete_idempotent(client):
    env_id = make_env(client)
    assert client.delete(f"/envs/{env_id}").status_code == 200
    assert client.delete(f"/envs/{env_id}").status_code == 200
    assert client.get(f"/envs/{env_id}/stats").status_code == 404


def test_benchmark_endpoint(client):
    resp = client.post(
        "/benchmarks",
        json={"stage": "instanced", "scenes": 2, "width": 16, "height": 16, "frames": 2},
    )
    assert resp.status_code == 200
    report = resp.json()
    assert report["stats"]["frames_produced"] == 4
    assert report["config"]["stage"] == "instanced"


def test_benchmark_usage_error_is_400(client):
    resp = client.post("/benchmarks", json={"stage": "bogus", "scenes": 1})
    assert resp.status_code == 400
    assert "stage" in resp.json()["detail"]
