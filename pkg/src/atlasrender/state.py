"""Tensor-shaped state of S parallel scenes and matrix packing for backends.

State updates are whole-tensor replacements; every successful set bumps the
group's generation counter so backends can count uploads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mathcore import (
    CameraPose,
    ProjectionParams,
    compose_trs_batch,
    flatten_column_major,
    perspective_projection,
    view_from_camera,
)
from .meshes import MeshAsset


class StateError(ValueError):
    """Invalid scene description or tensor update."""


@dataclass(frozen=True)
class GroupSpec:
    name: str
    mesh: MeshAsset
    instances_per_scene: int = 1
    shared: bool = False
    cull_backfaces: bool = True


@dataclass(frozen=True)
class SceneSpec:
    scene_count: int
    groups: tuple
    clear_color: tuple = (0.0, 0.0, 0.0, 1.0)
    aspect: float = 1.0


@dataclass
class ModelGroup:
    spec: GroupSpec
    positions: np.ndarray  # (S, I, 3) or (I, 3) if shared
    hprs: np.ndarray
    scales: np.ndarray  # (..., 1)
    colors: np.ndarray  # (..., 4) RGBA in [0, 1]
    generation: int = 0

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def instances_per_scene(self) -> int:
        return self.spec.instances_per_scene

    @property
    def shared(self) -> bool:
        return self.spec.shared


@dataclass(frozen=True)
class MatrixBuffer:
    """Packed column-major model matrices plus per-scene view-projections."""

    model_matrices: np.ndarray  # (16 * instance_count,) float64, column-major
    view_projections: np.ndarray  # (16 * S,) float64, column-major
    scene_count: int
    instances_per_scene: int
    shared: bool


def _expected_shape(scene_count: int, group: GroupSpec, trailing: int) -> tuple:
    if group.shared:
        return (group.instances_per_scene, trailing)
    return (scene_count, group.instances_per_scene, trailing)


class BatchState:
    """Mutable state of S scenes: groups, per-instance tensors, cameras."""

    def __init__(self, spec: SceneSpec):
        if spec.scene_count < 1:
            raise StateError("scene_count must be ≥ 1")
        clear = np.asarray(spec.clear_color, dtype=np.float64)
        if clear.shape != (4,) or np.any(clear < 0.0) or np.any(clear > 1.0):
            raise StateError("clear_color must be 4 components in [0, 1]")
        names = [g.name for g in spec.groups]
        if len(set(names)) != len(names):
            raise StateError("group names must be unique")
        self.spec = spec
        self.scene_count = spec.scene_count
        self.clear_color = tuple(clear)
        self.groups: dict[str, ModelGroup] = {}
        for g in spec.groups:
            if g.instances_per_scene < 1:
                raise StateError(f"group '{g.name}': instances_per_scene must be ≥ 1")
            s = spec.scene_count
            self.groups[g.name] = ModelGroup(
                spec=g,
                positions=np.zeros(_expected_shape(s, g, 3)),
                hprs=np.zeros(_expected_shape(s, g, 3)),
                scales=np.ones(_expected_shape(s, g, 1)),
                colors=np.ones(_expected_shape(s, g, 4)),
            )
        self.cameras = [CameraPose() for _ in range(spec.scene_count)]
        self.projections = [ProjectionParams(aspect=spec.aspect) for _ in range(spec.scene_count)]
        self.camera_generation = 0

    def group(self, name: str) -> ModelGroup:
        try:
            return self.groups[name]
        except KeyError:
            raise StateError(f"unknown group '{name}'") from None

    def _check(self, name: str, field_name: str, value, trailing: int) -> np.ndarray:
        group = self.group(name)
        arr = np.asarray(value, dtype=np.float64)
        expected = _expected_shape(self.scene_count, group.spec, trailing)
        if arr.shape != expected:
            raise StateError(
                f"group '{name}' {field_name}: expected shape {expected}, got {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise StateError(f"group '{name}' {field_name}: values must be finite")
        return np.ascontiguousarray(arr)

    def set_instance_transforms(self, name: str, positions, hprs, scales) -> None:
        group = self.group(name)
        pos = self._check(name, "positions", positions, 3)
        hpr = self._check(name, "hprs", hprs, 3)
        scale = self._check(name, "scales", scales, 1)
        if np.any(scale <= 0.0):
            raise StateError(f"group '{name}' scales: values must be > 0")
        group.positions, group.hprs, group.scales = pos, hpr, scale
        group.generation += 1

    def set_instance_colors(self, name: str, colors) -> None:
        group = self.group(name)
        col = self._check(name, "colors", colors, 4)
        if np.any(col < 0.0) or np.any(col > 1.0):
            raise StateError(f"group '{name}' colors: components must be in [0, 1]")
        group.colors = col
        group.generation += 1

    def set_cameras(self, poses, projections) -> None:
        poses = list(poses)
        projections = list(projections)
        if len(poses) != self.scene_count or len(projections) != self.scene_count:
            raise StateError(
                f"expected {self.scene_count} poses and projections, "
                f"got {len(poses)} and {len(projections)}"
            )
        self.cameras = poses
        self.projections = projections
        self.camera_generation += 1

    def instance_colors_flat(self, name: str) -> np.ndarray:
        """Per-drawn-instance RGBA in global-instance-id order (g = s*I + i)."""
        group = self.group(name)
        if group.shared:
            return np.tile(group.colors, (self.scene_count, 1))
        return group.colors.reshape(-1, 4)

    def pack_model_matrices(self, name: str) -> MatrixBuffer:
        """Pack a group's model matrices and the per-scene view-projections.

        Unshared groups pack one matrix per global instance id g = s*I + i;
        shared groups pack I matrices indexed by i for every scene.
        """
        group = self.group(name)
        pos = group.positions.reshape(-1, 3)
        hpr = group.hprs.reshape(-1, 3)
        scale = group.scales.reshape(-1, 1)
        models = compose_trs_batch(pos, hpr, scale)
        vps = np.stack(
            [
                perspective_projection(proj) @ view_from_camera(pose)
                for pose, proj in zip(self.cameras, self.projections)
            ]
        )
        return MatrixBuffer(
            model_matrices=flatten_column_major(models).reshape(-1),
            view_projections=flatten_column_major(vps).reshape(-1),
            scene_count=self.scene_count,
            instances_per_scene=group.instances_per_scene,
            shared=group.shared,
        )


def create_batch(spec: SceneSpec) -> BatchState:
    """Fresh batch: transforms at origin, scale 1, opaque white, identity cameras."""
    return BatchState(spec)


def global_instance_index(scene: int, instance: int, instances_per_scene: int) -> int:
    return scene * instances_per_scene + instance


def split_global_index(g: int, instances_per_scene: int) -> tuple:
    return g // instances_per_scene, g % instances_per_scene
