import numpy as np
import pytest

from atlasrender.gpubackend import (
    BackendUnavailableError,
    GpuFramePath,
    GpuRenderer,
    gpu_available,
)
from atlasrender.softbackend import SoftwareRenderer
from atlasrender.tiling import plan_layout

from batchgen import random_batch

HAVE_GPU = gpu_available()
needs_gpu = pytest.mark.skipif(not HAVE_GPU, reason="no GL device in this environment")


def test_unavailable_backend_raises_typed_error():
    if HAVE_GPU:
        pytest.skip("hardware backend present")
    with pytest.raises(BackendUnavailableError, match="unavailable"):
        GpuRenderer()


def test_gpu_available_is_boolean():
    assert isinstance(HAVE_GPU, bool)


def channel_match_fraction(a: np.ndarray, b: np.ndarray, tol: int) -> float:
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16))
    return float((diff <= tol).mean())


@needs_gpu
class TestGpuRendering:
    def test_matches_soft_backend_within_quantization(self):
        rng = np.random.default_rng(5)
        state = random_batch(rng, scene_count=4, instances=8)
        layout = plan_layout(4, 64, 64)
        soft_target, _ = SoftwareRenderer().render_tiled(state, layout)
        gpu = GpuRenderer()
        handle, _ = gpu.render_instanced(state, layout)
        frames = gpu.readback(handle, layout)
        soft = SoftwareRenderer().readback(soft_target, layout)
        assert channel_match_fraction(frames.reshape(-1), soft.reshape(-1), 3) >= 0.99

    def test_device_resident_path_rejected(self):
        gpu = GpuRenderer()
        state = random_batch(np.random.default_rng(0), scene_count=1, instances=1)
        layout = plan_layout(1, 32, 32)
        with pytest.raises(BackendUnavailableError, match="HOST_COPY"):
            gpu.render_instanced(state, layout, path=GpuFramePath.DEVICE_RESIDENT)

    def test_one_draw_per_group(self):
        state = random_batch(np.random.default_rng(1), scene_count=4, instances=8)
        layout = plan_layout(4, 32, 32)
        gpu = GpuRenderer()
        _, call = gpu.render_instanced(state, layout)
        assert call.draw_calls == len(state.groups)
        assert call.target_binds == 1

    def test_export_reuses_host_buffer(self):
        state = random_batch(np.random.default_rng(2), scene_count=2, instances=2)
        layout = plan_layout(2, 32, 32)
        gpu = GpuRenderer()
        for _ in range(5):
            handle, _ = gpu.render_instanced(state, layout)
            handle.export()
        assert gpu.allocation_count == 1

    def test_released_handle_refuses_export(self):
        state = random_batch(np.random.default_rng(3), scene_count=1, instances=1)
        gpu = GpuRenderer()
        handle, _ = gpu.render_instanced(state, plan_layout(1, 32, 32))
        handle.release()
        with pytest.raises(RuntimeError):
            handle.export()
