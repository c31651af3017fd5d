"""Batched multi-scene tiled renderer with a deterministic software
rasterizer, a vectorized pixel-observation environment, and a benchmark
harness."""

from .mathcore import (
    CameraPose,
    ClipRemap,
    ProjectionParams,
    Vec3,
    apply_clip_remap,
    clip_remap_for_tile,
    compose_trs,
    perspective_projection,
    rotation_from_hpr,
    view_from_camera,
)
from .bench import BenchConfig, BenchReport, BenchUsageError, run_benchmark
from .env import (
    CartPoleDynamics,
    CartPoleParams,
    VecEnv,
    env_from_config,
    load_env_config,
    make_cartpole_env,
)
from .gpubackend import BackendUnavailableError, gpu_available
from .meshes import MeshAsset, cylinder, load_obj, plane, unit_cube, uv_sphere
from .softbackend import RenderStats, RenderTarget, ShadingConfig, SoftwareRenderer
from .state import BatchState, GroupSpec, MatrixBuffer, SceneSpec, StateError, create_batch
from .tiling import LayoutError, TileLayout, partition_atlas, plan_layout, stitch_frames, tile_rect

__all__ = [
    "BackendUnavailableError",
    "BatchState",
    "BenchConfig",
    "BenchReport",
    "BenchUsageError",
    "CartPoleDynamics",
    "CartPoleParams",
    "VecEnv",
    "CameraPose",
    "ClipRemap",
    "GroupSpec",
    "LayoutError",
    "MatrixBuffer",
    "MeshAsset",
    "ProjectionParams",
    "RenderStats",
    "RenderTarget",
    "SceneSpec",
    "ShadingConfig",
    "SoftwareRenderer",
    "StateError",
    "TileLayout",
    "Vec3",
    "apply_clip_remap",
    "clip_remap_for_tile",
    "compose_trs",
    "create_batch",
    "cylinder",
    "env_from_config",
    "gpu_available",
    "load_env_config",
    "make_cartpole_env",
    "run_benchmark",
    "load_obj",
    "partition_atlas",
    "perspective_projection",
    "plan_layout",
    "plane",
    "rotation_from_hpr",
    "stitch_frames",
    "tile_rect",
    "unit_cube",
    "uv_sphere",
    "view_from_camera",
]

__version__ = "0.1.0"
