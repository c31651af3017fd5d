"""Hardware backend: one instanced draw per model type into a tiled atlas.

Requires a headless OpenGL 3.3 context via moderngl. When no device (or no
moderngl) is available every entry point raises BackendUnavailableError and
callers fall back to the software backend; the acceptance suite skips, not
fails, in that case.

Synchronization: frame export calls glFinish (moderngl ctx.finish) before
reading, i.e. a full pipeline fence per export. Coarser than a sync object
but unambiguous, and export is already a throughput boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .softbackend import RenderStats, ShadingConfig
from .state import BatchState
from .tiling import TileLayout, tile_rect


class BackendUnavailableError(RuntimeError):
    pass


class GpuFramePath:
    DEVICE_RESIDENT = "device_resident"
    HOST_COPY = "host_copy"


_VERTEX_SHADER = """
#version 330
uniform mat4 u_view_proj[%(max_scenes)d];
uniform vec4 u_remap[%(max_scenes)d];      // scale_x, scale_y, offset_x, offset_y
uniform vec4 u_tile_ndc[%(max_scenes)d];   // x0, y0, x1, y1 of tile in NDC
uniform int u_instances_per_scene;
uniform int u_scene_base;
in vec3 in_position;
in vec3 in_normal;
in vec4 in_model_c0;
in vec4 in_model_c1;
in vec4 in_model_c2;
in vec4 in_model_c3;
in vec4 in_color;
flat out vec3 v_normal;
flat out vec4 v_color;
out float gl_ClipDistance[4];
void main() {
    int scene = u_scene_base + gl_InstanceID / u_instances_per_scene;
    mat4 model = mat4(in_model_c0, in_model_c1, in_model_c2, in_model_c3);
    vec4 clip = u_view_proj[scene] * model * vec4(in_position, 1.0);
    vec4 remap = u_remap[scene];
    clip = vec4(clip.x * remap.x + clip.w * remap.z,
                clip.y * remap.y + clip.w * remap.w,
                clip.z, clip.w);
    vec4 tile = u_tile_ndc[scene];
    gl_ClipDistance[0] = clip.x - tile.x * clip.w;
    gl_ClipDistance[1] = tile.z * clip.w - clip.x;
    gl_ClipDistance[2] = clip.y - tile.y * clip.w;
    gl_ClipDistance[3] = tile.w * clip.w - clip.y;
    mat3 nmat = transpose(inverse(mat3(model)));
    v_normal = normalize(nmat * in_normal);
    v_color = in_color;
    gl_Position = clip;
}
"""

_FRAGMENT_SHADER = """
#version 330
uniform vec3 u_toward_light;
uniform float u_ambient;
uniform float u_diffuse;
uniform bool u_lambert;
flat in vec3 v_normal;
flat in vec4 v_color;
out vec4 frag_color;
void main() {
    float inten = 1.0;
    if (u_lambert) {
        inten = u_ambient + u_diffuse * max(0.0, dot(normalize(v_normal), u_toward_light));
    }
    frag_color = vec4(clamp(v_color.rgb * inten, 0.0, 1.0), v_color.a);
}
"""

_MAX_SCENES_PER_DRAW = 256  # uniform-array budget of mainline GL 3.3 drivers


def _create_context():
    try:
        import moderngl
    except ImportError as exc:
        raise BackendUnavailableError(
            "hardware backend unavailable: moderngl is not installed"
        ) from exc
    try:
        return moderngl, moderngl.create_standalone_context(require=330)
    except Exception as exc:
        raise BackendUnavailableError(
            f"hardware backend unavailable: no GL device ({exc})"
        ) from exc


def gpu_available() -> bool:
    try:
        moderngl, ctx = _create_context()
    except BackendUnavailableError:
        return False
    ctx.release()
    return True


@dataclass
class GpuFrameBatchHandle:
    """Completed render; frames stay on the renderer's persistent buffer.

    Exposes the standard tensor-interchange capsule via the exported host
    array (shape S x H x W x 4, uint8); released handles refuse export.
    """

    renderer: "GpuRenderer"
    layout: TileLayout
    path: str
    _epoch: int

    @property
    def shape(self) -> tuple:
        return (self.layout.scene_count, self.layout.tile_height, self.layout.tile_width, 4)

    def export(self) -> np.ndarray:
        return self.renderer.frame_export(self)

    def release(self) -> None:
        self._epoch = -1


class GpuRenderer:
    """One GL context per instance; confine to the creating thread."""

    def __init__(self):
        self._gl, self._ctx = _create_context()
        self._prog = self._ctx.program(
            vertex_shader=_VERTEX_SHADER % {"max_scenes": _MAX_SCENES_PER_DRAW},
            fragment_shader=_FRAGMENT_SHADER,
        )
        self.stats = RenderStats()
        self._fbo = None
        self._fbo_size = None
        self._host_buffer = None
        self._mesh_vbos = {}
        self._epoch = 0
        self.allocation_count = 0

    def _ensure_target(self, layout: TileLayout):
        size = (layout.atlas_width, layout.atlas_height)
        if self._fbo_size != size:
            if self._fbo is not None:
                self._fbo.release()
            color = self._ctx.texture(size, 4)
            depth = self._ctx.depth_renderbuffer(size)
            self._fbo = self._ctx.framebuffer(color_attachments=[color], depth_attachment=depth)
            self._fbo_size = size
        n_bytes = layout.scene_count * layout.tile_height * layout.tile_width * 4
        if self._host_buffer is None or self._host_buffer.nbytes != n_bytes:
            self._host_buffer = np.empty(
                (layout.scene_count, layout.tile_height, layout.tile_width, 4), dtype=np.uint8
            )
            self.allocation_count += 1

    def _mesh_geometry(self, mesh):
        # unindexed, flat geometric normal on every corner so flat shading
        # matches the software backend's per-triangle normal
        if mesh.name not in self._mesh_vbos:
            tri = mesh.triangles
            corners = mesh.vertices[tri.reshape(-1)]
            v0 = mesh.vertices[tri[:, 0]]
            face_n = np.cross(mesh.vertices[tri[:, 1]] - v0, mesh.vertices[tri[:, 2]] - v0)
            lengths = np.linalg.norm(face_n, axis=1, keepdims=True)
            lengths[lengths == 0.0] = 1.0
            face_n = np.repeat(face_n / lengths, 3, axis=0)
            data = np.hstack([corners, face_n]).astype("f4")
            self._mesh_vbos[mesh.name] = self._ctx.buffer(data.tobytes())
        return self._mesh_vbos[mesh.name]

    def render_instanced(
        self,
        state: BatchState,
        layout: TileLayout,
        shading: ShadingConfig = ShadingConfig(),
        path: str = GpuFramePath.HOST_COPY,
    ):
        if path == GpuFramePath.DEVICE_RESIDENT:
            raise BackendUnavailableError(
                "device-resident frames need graphics-compute interop; "
                "use GpuFramePath.HOST_COPY"
            )
        if layout.scene_count != state.scene_count:
            raise ValueError("layout does not match state scene count")
        if layout.scene_count > _MAX_SCENES_PER_DRAW:
            raise ValueError(
                f"gpu backend limited to {_MAX_SCENES_PER_DRAW} scenes per renderer; shard"
            )
        call = RenderStats()
        self._ensure_target(layout)
        ctx = self._ctx
        fbo = self._fbo
        fbo.use()
        ctx.enable(self._gl.DEPTH_TEST)
        ctx.enable(self._gl.CULL_FACE)
        for i in range(4):
            ctx.enable_direct(0x3000 + i)  # GL_CLIP_DISTANCE0 + i
        fbo.clear(*state.clear_color)
        call.target_binds += 1

        remaps = []
        tiles_ndc = []
        for s in range(layout.scene_count):
            _, remap = tile_rect(layout, s)
            remaps.extend([remap.scale_x, remap.scale_y, remap.offset_x, remap.offset_y])
            row, col = s // layout.cols, s % layout.cols
            x0 = -1.0 + 2.0 * col / layout.cols
            y1 = 1.0 - 2.0 * row / layout.rows
            tiles_ndc.extend([x0, y1 - 2.0 / layout.rows, x0 + 2.0 / layout.cols, y1])

        self._set_shading(shading)
        self._prog["u_scene_base"].value = 0
        self._prog["u_remap"].write(np.asarray(remaps, dtype="f4").tobytes())
        self._prog["u_tile_ndc"].write(np.asarray(tiles_ndc, dtype="f4").tobytes())

        for name, group in state.groups.items():
            buf = state.pack_model_matrices(name)
            self._prog["u_view_proj"].write(buf.view_projections.astype("f4").tobytes())
            self._prog["u_instances_per_scene"].value = group.instances_per_scene
            models = buf.model_matrices.astype("f4")
            colors = state.instance_colors_flat(name).astype("f4")
            n_drawn = state.scene_count * group.instances_per_scene
            if group.shared:
                # replicate shared transforms per scene so divisor-1 attributes line up
                models = np.tile(models.reshape(-1, 16), (state.scene_count, 1)).reshape(-1)
            inst = np.hstack([models.reshape(n_drawn, 16), colors]).astype("f4")
            vbo_inst = ctx.buffer(inst.tobytes())
            vbo_mesh = self._mesh_geometry(group.spec.mesh)
            vao = ctx.vertex_array(
                self._prog,
                [
                    (vbo_mesh, "3f 3f", "in_position", "in_normal"),
                    (
                        vbo_inst,
                        "4f 4f 4f 4f 4f/i",
                        "in_model_c0",
                        "in_model_c1",
                        "in_model_c2",
                        "in_model_c3",
                        "in_color",
                    ),
                ],
            )
            if group.spec.cull_backfaces:
                ctx.enable(self._gl.CULL_FACE)
            else:
                ctx.disable(self._gl.CULL_FACE)
            vao.render(instances=n_drawn)
            call.draw_calls += 1
            call.instances_drawn += n_drawn
            call.matrix_uploads += models.size
            vao.release()
            vbo_inst.release()
        call.matrix_uploads += 16 * state.scene_count * len(state.groups)
        self.stats.add(call)
        self._epoch += 1
        return GpuFrameBatchHandle(self, layout, path, self._epoch), call

    def _instance_data(self, state: BatchState, name: str):
        group = state.group(name)
        buf = state.pack_model_matrices(name)
        models = buf.model_matrices.astype("f4").reshape(-1, 16)
        if group.shared:
            models = np.tile(models, (state.scene_count, 1))
        colors = state.instance_colors_flat(name).astype("f4")
        return buf, np.hstack([models, colors]).astype("f4")

    def _set_shading(self, shading: ShadingConfig):
        self._prog["u_toward_light"].value = tuple(shading.toward_light())
        self._prog["u_ambient"].value = shading.ambient
        self._prog["u_diffuse"].value = shading.diffuse
        self._prog["u_lambert"].value = shading.mode == "lambert"

    def _one_instance_vao(self, mesh):
        # persistent single-instance buffer for the baseline per-draw paths
        if not hasattr(self, "_vbo_single"):
            self._vbo_single = self._ctx.buffer(reserve=20 * 4)
        return self._ctx.vertex_array(
            self._prog,
            [
                (self._mesh_geometry(mesh), "3f 3f", "in_position", "in_normal"),
                (
                    self._vbo_single,
                    "4f 4f 4f 4f 4f/i",
                    "in_model_c0", "in_model_c1", "in_model_c2", "in_model_c3", "in_color",
                ),
            ],
        )

    def render_tiled(self, state: BatchState, layout: TileLayout, shading: ShadingConfig = ShadingConfig()):
        """Baseline tiled path: one atlas bind, one draw per instance."""
        if layout.scene_count != state.scene_count:
            raise ValueError("layout does not match state scene count")
        call = RenderStats()
        self._ensure_target(layout)
        ctx = self._ctx
        self._fbo.use()
        ctx.enable(self._gl.DEPTH_TEST)
        for i in range(4):
            ctx.enable_direct(0x3000 + i)
        self._fbo.clear(*state.clear_color)
        call.target_binds += 1
        self._set_shading(shading)
        remaps, tiles_ndc = self._tile_uniform_tables(layout)
        self._prog["u_remap"].write(remaps)
        self._prog["u_tile_ndc"].write(tiles_ndc)
        self._prog["u_instances_per_scene"].value = 1
        for name, group in state.groups.items():
            buf, inst = self._instance_data(state, name)
            self._prog["u_view_proj"].write(buf.view_projections.astype("f4").tobytes())
            if group.spec.cull_backfaces:
                ctx.enable(self._gl.CULL_FACE)
            else:
                ctx.disable(self._gl.CULL_FACE)
            vao = self._one_instance_vao(group.spec.mesh)
            i_count = group.instances_per_scene
            for s in range(state.scene_count):
                self._prog["u_scene_base"].value = s
                for i in range(i_count):
                    self._vbo_single.write(inst[s * i_count + i].tobytes())
                    vao.render(instances=1)
                    call.draw_calls += 1
                    call.instances_drawn += 1
                    call.matrix_uploads += 16
            vao.release()
        self.stats.add(call)
        self._epoch += 1
        return GpuFrameBatchHandle(self, layout, GpuFramePath.HOST_COPY, self._epoch), call

    def render_naive(self, state: BatchState, width: int, height: int, shading: ShadingConfig = ShadingConfig()):
        """Baseline path: a render target per scene, one draw per instance."""
        from .tiling import plan_layout

        call = RenderStats()
        ctx = self._ctx
        if getattr(self, "_naive_fbo_size", None) != (width, height):
            color = ctx.texture((width, height), 4)
            depth = ctx.depth_renderbuffer((width, height))
            self._naive_fbo = ctx.framebuffer(color_attachments=[color], depth_attachment=depth)
            self._naive_fbo_size = (width, height)
        ctx.enable(self._gl.DEPTH_TEST)
        for i in range(4):
            ctx.enable_direct(0x3000 + i)
        self._set_shading(shading)
        # identity remap, full-frame clip rectangle for every scene slot
        full = plan_layout(1, width, height)
        remaps, tiles_ndc = self._tile_uniform_tables(full, repeat=state.scene_count)
        self._prog["u_remap"].write(remaps)
        self._prog["u_tile_ndc"].write(tiles_ndc)
        self._prog["u_instances_per_scene"].value = 1
        frames = np.empty((state.scene_count, height, width, 4), dtype=np.uint8)
        per_group = [(name, *self._instance_data(state, name)) for name in state.groups]
        for s in range(state.scene_count):
            self._naive_fbo.use()
            self._naive_fbo.clear(*state.clear_color)
            call.target_binds += 1
            self._prog["u_scene_base"].value = s
            for name, buf, inst in per_group:
                group = state.group(name)
                self._prog["u_view_proj"].write(buf.view_projections.astype("f4").tobytes())
                if group.spec.cull_backfaces:
                    ctx.enable(self._gl.CULL_FACE)
                else:
                    ctx.disable(self._gl.CULL_FACE)
                vao = self._one_instance_vao(group.spec.mesh)
                i_count = group.instances_per_scene
                for i in range(i_count):
                    self._vbo_single.write(inst[s * i_count + i].tobytes())
                    vao.render(instances=1)
                    call.draw_calls += 1
                    call.instances_drawn += 1
                    call.matrix_uploads += 16
                vao.release()
            ctx.finish()
            raw = np.frombuffer(self._naive_fbo.read(components=4), dtype=np.uint8)
            frames[s] = raw.reshape(height, width, 4)[::-1]
        call.frames_produced += state.scene_count
        self.stats.add(call)
        return frames, call

    def _tile_uniform_tables(self, layout: TileLayout, repeat: int = 1):
        remaps = []
        tiles_ndc = []
        for s in range(layout.scene_count):
            _, remap = tile_rect(layout, s)
            remaps.extend([remap.scale_x, remap.scale_y, remap.offset_x, remap.offset_y])
            row, col = s // layout.cols, s % layout.cols
            x0 = -1.0 + 2.0 * col / layout.cols
            y1 = 1.0 - 2.0 * row / layout.rows
            tiles_ndc.extend([x0, y1 - 2.0 / layout.rows, x0 + 2.0 / layout.cols, y1])
        remaps = remaps * repeat
        tiles_ndc = tiles_ndc * repeat
        return (
            np.asarray(remaps, dtype="f4").tobytes(),
            np.asarray(tiles_ndc, dtype="f4").tobytes(),
        )

    def readback(self, handle: GpuFrameBatchHandle, layout: TileLayout) -> np.ndarray:
        return self.frame_export(handle)

    def frame_export(self, handle: GpuFrameBatchHandle) -> np.ndarray:
        if handle._epoch != self._epoch or handle._epoch < 0:
            raise RuntimeError("frame handle was released or superseded")
        layout = handle.layout
        self._ctx.finish()
        raw = np.frombuffer(self._fbo.read(components=4), dtype=np.uint8)
        atlas = raw.reshape(layout.atlas_height, layout.atlas_width, 4)[::-1]  # to top-left origin
        for s in range(layout.scene_count):
            rect, _ = tile_rect(layout, s)
            self._host_buffer[s] = atlas[rect.y0 : rect.y0 + rect.height, rect.x0 : rect.x0 + rect.width]
        self.stats.frames_produced += layout.scene_count
        return self._host_buffer

    def release(self) -> None:
        self._ctx.release()
