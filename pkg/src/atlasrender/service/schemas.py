"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CreateEnvRequest(BaseModel):
    scenes: int
    width: int = 64
    height: int = 64
    backend: str = "soft"
    render_mode: str = "instanced"


class CreateEnvResponse(BaseModel):
    env_id: str
    obs_shape: tuple[int, int, int, int]


class ResetRequest(BaseModel):
    seed: int = 0


class ObservationPayload(BaseModel):
    observations: str = Field(description="base64-encoded raw frame bytes")
    shape: tuple[int, int, int, int]
    dtype: str = "uint8"
    checksum: str = Field(description="sha256 hex of the raw frame bytes")


class StepRequest(BaseModel):
    actions: list[float]


class StepResponse(ObservationPayload):
    rewards: list[float]
    dones: list[bool]


class StatsResponse(BaseModel):
    target_binds: int
    draw_calls: int
    instances_drawn: int
    matrix_uploads: int
    frames_produced: int


class BenchRequest(BaseModel):
    stage: str
    scenes: int
    width: int = 64
    height: int = 64
    frames: int = 100
    backend: str = "soft"
    workers: int = 1
    seed: int = 0
