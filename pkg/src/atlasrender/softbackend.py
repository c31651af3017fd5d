"""Deterministic reference rasterizer backend.

Serves as the correctness oracle for tiling and instancing: render_naive,
render_tiled and render_instanced produce byte-identical pixels, differing
only in how work is batched and what the counters record.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._raster import _draw_batch, _draw_one
from .state import BatchState
from .tiling import TileLayout, partition_atlas, tile_rect


@dataclass
class RenderStats:
    """Counters that make the ablation stages testable without a GPU.

    matrix_uploads counts floats pushed to the (real or simulated) device:
    16 per draw for the one-draw-per-instance paths, one packed buffer per
    changed generation for the instanced path.
    """

    target_binds: int = 0
    draw_calls: int = 0
    instances_drawn: int = 0
    matrix_uploads: int = 0
    frames_produced: int = 0

    def add(self, other: "RenderStats") -> None:
        self.target_binds += other.target_binds
        self.draw_calls += other.draw_calls
        self.instances_drawn += other.instances_drawn
        self.matrix_uploads += other.matrix_uploads
        self.frames_produced += other.frames_produced

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "RenderStats":
        return RenderStats(**d)


@dataclass(frozen=True)
class ShadingConfig:
    """Flat shading setup; light_dir is the direction light travels (world
    space), so Lambert intensity uses dot(normal, -light_dir)."""

    mode: str = "lambert"  # "lambert" or "unlit"
    light_dir: tuple = (-0.5774, -0.5774, -0.5774)
    ambient: float = 0.2
    diffuse: float = 0.8

    def __post_init__(self):
        if self.mode not in ("lambert", "unlit"):
            raise ValueError(f"unknown shading mode '{self.mode}'")
        length = math.sqrt(sum(c * c for c in self.light_dir))
        if abs(length - 1.0) > 1e-4:
            raise ValueError("light_dir must be unit length within 1e-4")
        if self.ambient + self.diffuse > 1.0 + 1e-12:
            raise ValueError("ambient + diffuse must not exceed 1")

    def toward_light(self) -> np.ndarray:
        return -np.asarray(self.light_dir, dtype=np.float64)


@dataclass
class RenderTarget:
    color: np.ndarray  # (atlas_h, atlas_w, 4) uint8, top-left origin
    depth: np.ndarray  # (atlas_h, atlas_w) float64, cleared to 1.0
    layout: TileLayout


def _quantize_clear(clear_color) -> np.ndarray:
    return np.floor(255.0 * np.asarray(clear_color) + 0.5).astype(np.uint8)


def _unpack_column_major(flat: np.ndarray, n: int) -> np.ndarray:
    return np.ascontiguousarray(flat.reshape(n, 4, 4).transpose(0, 2, 1))


class SoftwareRenderer:
    """CPU rasterizer; confine an instance to one thread at a time.

    `stats` accumulates across the session; every render also returns the
    per-call counter delta.
    """

    def __init__(self):
        self.stats = RenderStats()
        self._model_gens: dict[str, int] = {}
        self._camera_gen: int | None = None

    # -- per-group draw data, shared verbatim by all three render paths so
    # -- their pixel math is bit-identical
    def _group_draw_data(self, state: BatchState, name: str):
        group = state.group(name)
        buf = state.pack_model_matrices(name)
        s = state.scene_count
        i = group.instances_per_scene
        models = _unpack_column_major(buf.model_matrices, i if group.shared else s * i)
        vps = _unpack_column_major(buf.view_projections, s)
        scene_ids = np.repeat(np.arange(s), i)
        model_ids = np.tile(np.arange(i), s) if group.shared else np.arange(s * i)
        mvps = np.matmul(vps[scene_ids], models[model_ids])
        nmats = np.ascontiguousarray(
            np.linalg.inv(models[model_ids][:, :3, :3]).transpose(0, 2, 1)
        )
        rgbas = np.ascontiguousarray(state.instance_colors_flat(name))
        return buf, mvps, nmats, rgbas, scene_ids

    def _shading_args(self, shading: ShadingConfig):
        return (
            shading.mode == "lambert",
            np.ascontiguousarray(shading.toward_light()),
            float(shading.ambient),
            float(shading.diffuse),
        )

    def render_naive(self, state: BatchState, width: int, height: int, shading: ShadingConfig = ShadingConfig()):
        """One render target per scene, one draw call per instance."""
        call = RenderStats()
        lambert, light, ambient, diffuse = self._shading_args(shading)
        clear = _quantize_clear(state.clear_color)
        s_count = state.scene_count
        frames = np.empty((s_count, height, width, 4), dtype=np.uint8)
        per_group = {name: self._group_draw_data(state, name) for name in state.groups}
        for s in range(s_count):
            color = np.empty((height, width, 4), dtype=np.uint8)
            color[:] = clear
            depth = np.full((height, width), 1.0)
            call.target_binds += 1
            for name, group in state.groups.items():
                mesh = group.spec.mesh
                cull = group.spec.cull_backfaces
                _, mvps, nmats, rgbas, _ = per_group[name]
                i_count = group.instances_per_scene
                for i in range(i_count):
                    g = s * i_count + i
                    _draw_one(
                        mesh.vertices, mesh.triangles,
                        mvps[g], nmats[g], rgbas[g],
                        width, height, 0, 0,
                        lambert, light, ambient, diffuse, cull,
                        color, depth,
                    )
                    call.draw_calls += 1
                    call.instances_drawn += 1
                    call.matrix_uploads += 16
            frames[s] = color
        call.frames_produced += s_count
        self.stats.add(call)
        return frames, call

    def _make_target(self, state: BatchState, layout: TileLayout) -> RenderTarget:
        if layout.scene_count != state.scene_count:
            raise ValueError(
                f"layout is for {layout.scene_count} scenes, state has {state.scene_count}"
            )
        color = np.empty((layout.atlas_height, layout.atlas_width, 4), dtype=np.uint8)
        color[:] = _quantize_clear(state.clear_color)
        depth = np.full((layout.atlas_height, layout.atlas_width), 1.0)
        return RenderTarget(color, depth, layout)

    def render_tiled(self, state: BatchState, layout: TileLayout, shading: ShadingConfig = ShadingConfig()):
        """Single atlas target; still one draw call per instance."""
        call = RenderStats()
        lambert, light, ambient, diffuse = self._shading_args(shading)
        target = self._make_target(state, layout)
        call.target_binds += 1
        w, h = layout.tile_width, layout.tile_height
        per_group = {name: self._group_draw_data(state, name) for name in state.groups}
        for s in range(state.scene_count):
            rect, _ = tile_rect(layout, s)
            for name, group in state.groups.items():
                mesh = group.spec.mesh
                cull = group.spec.cull_backfaces
                _, mvps, nmats, rgbas, _ = per_group[name]
                i_count = group.instances_per_scene
                for i in range(i_count):
                    g = s * i_count + i
                    _draw_one(
                        mesh.vertices, mesh.triangles,
                        mvps[g], nmats[g], rgbas[g],
                        w, h, rect.x0, rect.y0,
                        lambert, light, ambient, diffuse, cull,
                        target.color, target.depth,
                    )
                    call.draw_calls += 1
                    call.instances_drawn += 1
                    call.matrix_uploads += 16
        self.stats.add(call)
        return target, call

    def render_instanced(self, state: BatchState, layout: TileLayout, shading: ShadingConfig = ShadingConfig()):
        """Single atlas target, one logical draw per group covering all instances."""
        call = RenderStats()
        lambert, light, ambient, diffuse = self._shading_args(shading)
        target = self._make_target(state, layout)
        call.target_binds += 1
        w, h = layout.tile_width, layout.tile_height
        offsets = np.empty((state.scene_count, 2), dtype=np.int64)
        for s in range(state.scene_count):
            rect, _ = tile_rect(layout, s)
            offsets[s, 0] = rect.x0
            offsets[s, 1] = rect.y0
        vp_floats = 16 * state.scene_count
        if self._camera_gen != state.camera_generation:
            call.matrix_uploads += vp_floats
            self._camera_gen = state.camera_generation
        for name, group in state.groups.items():
            mesh = group.spec.mesh
            cull = group.spec.cull_backfaces
            buf, mvps, nmats, rgbas, scene_ids = self._group_draw_data(state, name)
            offs = np.ascontiguousarray(offsets[scene_ids])
            _draw_batch(
                mesh.vertices, mesh.triangles,
                mvps, nmats, rgbas, offs,
                w, h,
                lambert, light, ambient, diffuse, cull,
                target.color, target.depth,
            )
            call.draw_calls += 1
            call.instances_drawn += mvps.shape[0]
            if self._model_gens.get(name) != group.generation:
                call.matrix_uploads += buf.model_matrices.size
                self._model_gens[name] = group.generation
        self.stats.add(call)
        return target, call

    def readback(self, target: RenderTarget, layout: TileLayout) -> np.ndarray:
        """Partition the atlas into contiguous frames (the host path)."""
        frames = partition_atlas(target.color, layout)
        self.stats.frames_produced += layout.scene_count
        return frames


def warm_up() -> None:
    """Force numba compilation of the raster kernels on a trivial draw."""
    verts = np.array([[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.0, 0.5, 0.0]])
    tris = np.array([[0, 1, 2]], dtype=np.int32)
    mvp = np.eye(4)
    nmat = np.eye(3)
    rgba = np.ones(4)
    color = np.zeros((4, 4, 4), dtype=np.uint8)
    depth = np.full((4, 4), 1.0)
    light = np.array([0.0, 0.0, 1.0])
    _draw_one(verts, tris, mvp, nmat, rgba, 4, 4, 0, 0, True, light, 0.2, 0.8, True, color, depth)
    _draw_batch(
        verts, tris, mvp[None], nmat[None], rgba[None],
        np.zeros((1, 2), dtype=np.int64), 4, 4, True, light, 0.2, 0.8, True, color, depth,
    )
