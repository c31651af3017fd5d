"""Physics-agnostic vectorized environment facade with pixel observations.

Ships a cart-pole example driven by a stub explicit-Euler dynamics so the
benchmark harness exercises realistic per-step state churn. Any object with
the same hook methods (reset_scenes / advance / write_to) can replace it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mathcore import CameraPose, ProjectionParams, Vec3
from .meshes import MeshAsset, cylinder, plane, unit_cube
from .softbackend import ShadingConfig, SoftwareRenderer
from .state import BatchState, GroupSpec, SceneSpec, create_batch
from .tiling import plan_layout


@dataclass(frozen=True)
class CartPoleParams:
    gravity: float = 9.8
    mass_cart: float = 1.0
    mass_pole: float = 0.1
    pole_half_length: float = 0.5
    force_mag: float = 10.0
    dt: float = 0.02
    theta_threshold: float = 0.2095  # rad
    x_threshold: float = 2.4


def _scaled_mesh(base: MeshAsset, scale_xyz, name: str) -> MeshAsset:
    verts = base.vertices * np.asarray(scale_xyz, dtype=np.float64)
    norms = base.normals / np.asarray(scale_xyz, dtype=np.float64)
    norms = norms / np.linalg.norm(norms, axis=1, keepdims=True)
    return MeshAsset(name, verts, norms, base.triangles)


class CartPoleDynamics:
    """Stub cart-pole physics: explicit Euler on the classic equations."""

    def __init__(self, scene_count: int, params: CartPoleParams = CartPoleParams()):
        self.scene_count = scene_count
        self.params = params
        # columns: x, x_dot, theta, theta_dot
        self.state = np.zeros((scene_count, 4))

    def reset_scenes(self, scenes: np.ndarray, rngs: list) -> None:
        for s in scenes:
            self.state[s] = 0.0
            self.state[s, 2] = rngs[s].uniform(-0.05, 0.05)

    def advance(self, actions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        x, x_dot, theta, theta_dot = self.state.T.copy()
        force = p.force_mag * actions
        total_mass = p.mass_cart + p.mass_pole
        polemass_length = p.mass_pole * p.pole_half_length
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        temp = (force + polemass_length * theta_dot**2 * sin_t) / total_mass
        theta_acc = (p.gravity * sin_t - cos_t * temp) / (
            p.pole_half_length * (4.0 / 3.0 - p.mass_pole * cos_t**2 / total_mass)
        )
        x_acc = temp - polemass_length * theta_acc * cos_t / total_mass
        self.state[:, 0] = x + p.dt * x_dot
        self.state[:, 1] = x_dot + p.dt * x_acc
        self.state[:, 2] = theta + p.dt * theta_dot
        self.state[:, 3] = theta_dot + p.dt * theta_acc
        new_theta = self.state[:, 2]
        upright = np.abs(new_theta) < p.theta_threshold
        in_bounds = np.abs(self.state[:, 0]) < p.x_threshold
        rewards = upright.astype(np.float64)
        dones = ~(upright & in_bounds)
        return rewards, dones

    def write_to(self, state: BatchState) -> None:
        s = self.scene_count
        x = self.state[:, 0]
        theta_deg = np.rad2deg(self.state[:, 2])
        cart_pos = np.zeros((s, 1, 3))
        cart_pos[:, 0, 0] = x
        cart_pos[:, 0, 2] = 0.1
        pole_pos = np.zeros((s, 1, 3))
        pole_pos[:, 0, 0] = x
        pole_pos[:, 0, 2] = 0.2
        pole_hpr = np.zeros((s, 1, 3))
        pole_hpr[:, 0, 2] = theta_deg  # roll tips the +z cylinder toward +x
        ones = np.ones((s, 1, 1))
        state.set_instance_transforms("cart", cart_pos, np.zeros((s, 1, 3)), ones)
        state.set_instance_transforms("pole", pole_pos, pole_hpr, ones)


class VecEnv:
    """S logical scenes stepped with one batched call, observed as pixels.

    One render per step; observations are exactly the renderer's FrameBatch.
    """

    def __init__(
        self,
        state: BatchState,
        dynamics,
        width: int,
        height: int,
        renderer=None,
        render_mode: str = "instanced",
        shading: ShadingConfig = ShadingConfig(),
    ):
        if render_mode not in ("naive", "tiled", "instanced"):
            raise ValueError(f"unknown render_mode '{render_mode}'")
        self.state = state
        self.dynamics = dynamics
        self.width = width
        self.height = height
        self.renderer = renderer if renderer is not None else SoftwareRenderer()
        self.render_mode = render_mode
        self.shading = shading
        self.layout = plan_layout(state.scene_count, width, height)
        self._rngs = None

    @property
    def scene_count(self) -> int:
        return self.state.scene_count

    @property
    def obs_shape(self) -> tuple:
        return (self.scene_count, self.height, self.width, 4)

    def render(self) -> np.ndarray:
        if self.render_mode == "naive":
            frames, _ = self.renderer.render_naive(self.state, self.width, self.height, self.shading)
            return frames
        if self.render_mode == "tiled":
            target, _ = self.renderer.render_tiled(self.state, self.layout, self.shading)
        else:
            target, _ = self.renderer.render_instanced(self.state, self.layout, self.shading)
        return self.renderer.readback(target, self.layout)

    def reset(self, seed: int = 0, scene_offset: int = 0) -> np.ndarray:
        """Seeded reset; scene s draws from rng([seed, scene_offset + s]) so
        sharded workers reproduce the unsharded per-scene streams."""
        self._rngs = [
            np.random.default_rng([seed, scene_offset + s]) for s in range(self.scene_count)
        ]
        self.dynamics.reset_scenes(np.arange(self.scene_count), self._rngs)
        self.dynamics.write_to(self.state)
        return self.render()

    def step(self, actions) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        actions = np.asarray(actions, dtype=np.float64).reshape(-1)
        if actions.shape[0] != self.scene_count:
            raise ValueError(f"expected {self.scene_count} actions, got {actions.shape[0]}")
        if self._rngs is None:
            self.reset(0)
        rewards, dones = self.dynamics.advance(actions)
        done_idx = np.flatnonzero(dones)
        if done_idx.size:
            self.dynamics.reset_scenes(done_idx, self._rngs)
        self.dynamics.write_to(self.state)
        obs = self.render()
        return obs, rewards, dones


def make_cartpole_env(
    scene_count: int,
    width: int = 64,
    height: int = 64,
    backend: str | object = "soft",
    render_mode: str = "instanced",
    params: CartPoleParams = CartPoleParams(),
    shading: ShadingConfig = ShadingConfig(),
) -> VecEnv:
    """Cart-pole scene: shared ground plane, cart box, hinged pole cylinder."""
    if scene_count < 1:
        raise ValueError("scene_count must be ≥ 1")
    ground = _scaled_mesh(plane(), (10.0, 10.0, 1.0), "ground")
    cart = _scaled_mesh(unit_cube(), (0.4, 0.2, 0.2), "cart")
    pole = _scaled_mesh(cylinder(segments=10), (0.08, 0.08, 1.0), "pole")
    spec = SceneSpec(
        scene_count=scene_count,
        groups=(
            GroupSpec("ground", ground, 1, shared=True),
            GroupSpec("cart", cart, 1),
            GroupSpec("pole", pole, 1),
        ),
        clear_color=(0.3, 0.5, 0.7, 1.0),
        aspect=width / height,
    )
    state = create_batch(spec)
    state.set_instance_colors("ground", np.array([[0.25, 0.35, 0.2, 1.0]]))
    state.set_instance_colors("cart", np.tile([0.8, 0.15, 0.1, 1.0], (scene_count, 1, 1)))
    state.set_instance_colors("pole", np.tile([0.85, 0.7, 0.3, 1.0], (scene_count, 1, 1)))
    pose = CameraPose(Vec3(0.0, -2.0, 0.6))
    proj = ProjectionParams(fov_y_deg=45.0, aspect=width / height, near=0.1, far=100.0)
    state.set_cameras([pose] * scene_count, [proj] * scene_count)

    if isinstance(backend, str):
        if backend == "soft":
            renderer = SoftwareRenderer()
        elif backend == "gpu":
            from .gpubackend import GpuRenderer

            renderer = GpuRenderer()
        else:
            raise ValueError(f"unknown backend '{backend}'")
    else:
        renderer = backend
    dynamics = CartPoleDynamics(scene_count, params)
    return VecEnv(state, dynamics, width, height, renderer, render_mode, shading)


ENV_CONFIG_KEYS = ("scenes", "width", "height", "backend", "seed", "dynamics")


def load_env_config(path) -> dict:
    """Read an env config file (JSON or TOML, chosen by suffix).

    Recognized keys: scenes (required), width, height, backend, seed, and a
    dynamics table with any CartPoleParams field.
    """
    p = Path(path)
    if p.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib

        with open(p, "rb") as fh:
            raw = tomllib.load(fh)
    else:
        raw = json.loads(p.read_text())
    unknown = set(raw) - set(ENV_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown env config keys: {sorted(unknown)}")
    if "scenes" not in raw:
        raise ValueError("env config requires 'scenes'")
    return raw


def env_from_config(config: dict) -> tuple[VecEnv, int]:
    params = CartPoleParams(**config.get("dynamics", {}))
    env = make_cartpole_env(
        scene_count=config["scenes"],
        width=config.get("width", 64),
        height=config.get("height", 64),
        backend=config.get("backend", "soft"),
        params=params,
    )
    return env, config.get("seed", 0)
