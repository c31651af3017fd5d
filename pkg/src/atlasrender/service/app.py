"""HTTP service wrapping the renderer: env sessions and benchmark runs.

Sessions live in process memory; run single-worker. Frames travel as
base64-encoded raw bytes with shape/dtype so any client can reassemble the
(S, H, W, 4) uint8 tensor.
"""

from __future__ import annotations

import base64
import hashlib
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from ..bench import BenchConfig, BenchUsageError, run_benchmark
from ..env import VecEnv, make_cartpole_env
from ..gpubackend import BackendUnavailableError
from ..state import StateError
from .schemas import (
    BenchRequest,
    CreateEnvRequest,
    CreateEnvResponse,
    ObservationPayload,
    ResetRequest,
    StatsResponse,
    StepRequest,
    StepResponse,
)

app = FastAPI(title="atlasrender", version="0.1.0")

_sessions: dict[str, VecEnv] = {}


def _get_env(env_id: str) -> VecEnv:
    env = _sessions.get(env_id)
    if env is None:
        raise HTTPException(status_code=404, detail=f"unknown env '{env_id}'")
    return env


def _payload(obs: np.ndarray) -> dict:
    raw = obs.tobytes()
    return {
        "observations": base64.b64encode(raw).decode(),
        "shape": obs.shape,
        "dtype": "uint8",
        "checksum": hashlib.sha256(raw).hexdigest(),
    }


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/envs", response_model=CreateEnvResponse)
def create_env(req: CreateEnvRequest) -> CreateEnvResponse:
    try:
        env = make_cartpole_env(
            req.scenes, req.width, req.height, backend=req.backend, render_mode=req.render_mode
        )
    except (StateError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except BackendUnavailableError as exc:
        raise HTTPException(status_code=503, detail=str(exc))
    env_id = uuid.uuid4().hex
    _sessions[env_id] = env
    return CreateEnvResponse(env_id=env_id, obs_shape=env.obs_shape)


@app.post("/envs/{env_id}/reset", response_model=ObservationPayload)
def reset_env(env_id: str, req: ResetRequest) -> ObservationPayload:
    env = _get_env(env_id)
    obs = env.reset(seed=req.seed)
    return ObservationPayload(**_payload(obs))


@app.post("/envs/{env_id}/step", response_model=StepResponse)
def step_env(env_id: str, req: StepRequest) -> StepResponse:
    env = _get_env(env_id)
    try:
        obs, rewards, dones = env.step(np.asarray(req.actions))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return StepResponse(
        **_payload(obs),
        rewards=[float(r) for r in rewards],
        dones=[bool(d) for d in dones],
    )


@app.get("/envs/{env_id}/stats", response_model=StatsResponse)
def env_stats(env_id: str) -> StatsResponse:
    env = _get_env(env_id)
    return StatsResponse(**env.renderer.stats.to_dict())


@app.delete("/envs/{env_id}")
def close_env(env_id: str) -> dict:
    # double-close is a no-op by contract
    _sessions.pop(env_id, None)
    return {"closed": env_id}


@app.post("/benchmarks")
def run_bench(req: BenchRequest) -> dict:
    try:
        config = BenchConfig(**req.model_dump())
        report = run_benchmark(config)
    except BenchUsageError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except BackendUnavailableError as exc:
        raise HTTPException(status_code=503, detail=str(exc))
    return report.to_dict()
