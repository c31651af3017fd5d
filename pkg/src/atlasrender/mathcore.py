"""Transform algebra: rotations, TRS matrices, view/projection, tile clip remap.

All matrices are 4x4 float64 numpy arrays in conventional math layout
(``M[row, col]``); packed GPU buffers flatten them column-major via
``flatten_column_major``. Angles cross the API boundary in degrees.

Conventions (fixed here, once):
  * right-handed Z-up world
  * heading-pitch-roll rotation, R = Rz(h) @ Rx(p) @ Ry(r)
  * view space looks down -Z; at zero HPR the camera looks along world +Y
    with world +Z up
  * projection NDC depth range is [-1, 1]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Mat4 = np.ndarray  # (4, 4) float64


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Vec3 components must be finite, got ({self.x}, {self.y}, {self.z})")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class CameraPose:
    """Camera position (world units) and heading-pitch-roll (degrees)."""

    position: Vec3 = Vec3()
    hpr: Vec3 = Vec3()


@dataclass(frozen=True)
class ProjectionParams:
    fov_y_deg: float = 60.0
    aspect: float = 1.0
    near: float = 0.1
    far: float = 1000.0

    def __post_init__(self):
        if not 0.0 < self.fov_y_deg < 180.0:
            raise ValueError(f"fov_y_deg must be in (0, 180), got {self.fov_y_deg}")
        if self.aspect <= 0.0:
            raise ValueError(f"aspect must be > 0, got {self.aspect}")
        if self.near <= 0.0:
            raise ValueError(f"near must be > 0, got {self.near}")
        if self.far <= self.near:
            raise ValueError(f"far must be > near, got near={self.near} far={self.far}")


@dataclass(frozen=True)
class ClipRemap:
    """Linear clip-space adjustment squeezing a scene's NDC square into a tile."""

    scale_x: float = 1.0
    scale_y: float = 1.0
    offset_x: float = 0.0
    offset_y: float = 0.0


def _rotation_batch(hprs: np.ndarray) -> np.ndarray:
    """(N, 3) HPR degrees -> (N, 3, 3) rotation matrices, R = Rz(h) Rx(p) Ry(r)."""
    rad = np.deg2rad(hprs)
    ch, cp, cr = np.cos(rad[:, 0]), np.cos(rad[:, 1]), np.cos(rad[:, 2])
    sh, sp, sr = np.sin(rad[:, 0]), np.sin(rad[:, 1]), np.sin(rad[:, 2])
    n = hprs.shape[0]
    rz = np.zeros((n, 3, 3))
    rz[:, 0, 0], rz[:, 0, 1] = ch, -sh
    rz[:, 1, 0], rz[:, 1, 1] = sh, ch
    rz[:, 2, 2] = 1.0
    rx = np.zeros((n, 3, 3))
    rx[:, 0, 0] = 1.0
    rx[:, 1, 1], rx[:, 1, 2] = cp, -sp
    rx[:, 2, 1], rx[:, 2, 2] = sp, cp
    ry = np.zeros((n, 3, 3))
    ry[:, 0, 0], ry[:, 0, 2] = cr, sr
    ry[:, 1, 1] = 1.0
    ry[:, 2, 0], ry[:, 2, 2] = -sr, cr
    return rz @ rx @ ry


def rotation_from_hpr(hpr: Vec3) -> Mat4:
    """Rotation-only matrix for heading-pitch-roll degrees in a Z-up world."""
    m = np.eye(4)
    m[:3, :3] = _rotation_batch(hpr.to_array()[None, :])[0]
    return m


def compose_trs_batch(positions: np.ndarray, hprs: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Vectorized T(p) @ R(hpr) @ S(s) for N instances.

    positions (N, 3), hprs (N, 3) degrees, scales (N, 1) or (N, 3); all float.
    Returns (N, 4, 4). This is the single code path behind both the scalar
    API and matrix-buffer packing, so the two agree exactly.
    """
    positions = np.asarray(positions, dtype=np.float64)
    hprs = np.asarray(hprs, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if np.any(scales <= 0.0):
        raise ValueError("scale components must be > 0")
    if not (np.isfinite(positions).all() and np.isfinite(hprs).all() and np.isfinite(scales).all()):
        raise ValueError("transform components must be finite")
    n = positions.shape[0]
    if scales.shape[-1] == 1:
        scales = np.broadcast_to(scales, (n, 3))
    rot = _rotation_batch(hprs)
    m = np.zeros((n, 4, 4))
    m[:, :3, :3] = rot * scales[:, None, :]
    m[:, :3, 3] = positions
    m[:, 3, 3] = 1.0
    return m


def compose_trs(position: Vec3, hpr: Vec3, scale) -> Mat4:
    """Model matrix M = T(position) @ R(hpr) @ S(scale); scalar scale broadcasts."""
    if isinstance(scale, Vec3):
        s = scale.to_array()[None, :]
    else:
        s = np.array([[float(scale)]])
    return compose_trs_batch(position.to_array()[None, :], hpr.to_array()[None, :], s)[0]


# World Z-up to view space: view_x = world_x, view_y = world_z, view_z = -world_y.
_BASIS_WORLD_TO_VIEW = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, -1.0, 0.0],
    ]
)


def view_from_camera(pose: CameraPose) -> Mat4:
    """World-to-view matrix V = B @ R(hpr)^T @ T(-position)."""
    r = _rotation_batch(pose.hpr.to_array()[None, :])[0]
    m = np.eye(4)
    m[:3, :3] = _BASIS_WORLD_TO_VIEW @ r.T
    m[:3, 3] = m[:3, :3] @ (-pose.position.to_array())
    return m


def camera_world_matrix(pose: CameraPose) -> Mat4:
    """Inverse of view_from_camera: T(position) @ R(hpr) @ B^-1."""
    r = _rotation_batch(pose.hpr.to_array()[None, :])[0]
    m = np.eye(4)
    m[:3, :3] = r @ _BASIS_WORLD_TO_VIEW.T
    m[:3, 3] = pose.position.to_array()
    return m


def perspective_projection(p: ProjectionParams) -> Mat4:
    """Right-handed perspective, view -Z forward, NDC in [-1, 1] on all axes."""
    f = 1.0 / math.tan(math.radians(p.fov_y_deg) * 0.5)
    m = np.zeros((4, 4))
    m[0, 0] = f / p.aspect
    m[1, 1] = f
    m[2, 2] = -(p.far + p.near) / (p.far - p.near)
    m[2, 3] = -2.0 * p.far * p.near / (p.far - p.near)
    m[3, 2] = -1.0
    return m


def clip_remap_for_tile(rows: int, cols: int, row: int, col: int) -> ClipRemap:
    """Remap for tile (row, col) of an rows x cols grid; row 0 is the top."""
    if not (0 <= row < rows and 0 <= col < cols):
        raise ValueError(f"tile ({row}, {col}) outside {rows}x{cols} grid")
    return ClipRemap(
        scale_x=1.0 / cols,
        scale_y=1.0 / rows,
        offset_x=-1.0 + (2 * col + 1) / cols,
        offset_y=1.0 - (2 * row + 1) / rows,
    )


def apply_clip_remap(clip: np.ndarray, remap: ClipRemap) -> np.ndarray:
    """Remap a homogeneous clip-space point into its tile's clip sub-volume."""
    x, y, z, w = np.asarray(clip, dtype=np.float64)
    return np.array(
        [
            x * remap.scale_x + w * remap.offset_x,
            y * remap.scale_y + w * remap.offset_y,
            z,
            w,
        ]
    )


def flatten_column_major(m: np.ndarray) -> np.ndarray:
    """Flatten one matrix or a batch of matrices to column-major float buffers."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 2:
        return np.ascontiguousarray(m.T.reshape(-1))
    return np.ascontiguousarray(m.transpose(0, 2, 1).reshape(m.shape[0], -1))
