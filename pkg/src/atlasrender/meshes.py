"""Mesh assets: built-in primitives and a minimal OBJ subset loader.

Meshes are immutable after construction. Positions/normals are float64
arrays; triangles are int32 vertex-index triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MeshAsset:
    name: str
    vertices: np.ndarray  # (Nv, 3) positions
    normals: np.ndarray  # (Nv, 3) unit vertex normals
    triangles: np.ndarray = field(repr=False)  # (Nt, 3) int32 indices

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        norms = np.ascontiguousarray(np.asarray(self.normals, dtype=np.float64))
        tris = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int32))
        if tris.ndim != 2 or tris.shape[1] != 3 or tris.shape[0] < 1:
            raise ValueError(f"mesh '{self.name}' needs at least one triangle")
        if tris.min() < 0 or tris.max() >= verts.shape[0]:
            raise ValueError(f"mesh '{self.name}' has out-of-range triangle indices")
        lengths = np.linalg.norm(norms, axis=1)
        if np.any(np.abs(lengths - 1.0) > 1e-3):
            raise ValueError(f"mesh '{self.name}' has non-unit normals")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "normals", norms)
        object.__setattr__(self, "triangles", tris)
        self.vertices.setflags(write=False)
        self.normals.setflags(write=False)
        self.triangles.setflags(write=False)

    @property
    def triangle_count(self) -> int:
        return int(self.triangles.shape[0])


def _vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted vertex normals from face geometry."""
    normals = np.zeros_like(vertices)
    v0 = vertices[triangles[:, 0]]
    face = np.cross(vertices[triangles[:, 1]] - v0, vertices[triangles[:, 2]] - v0)
    for k in range(3):
        np.add.at(normals, triangles[:, k], face)
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    lengths[lengths == 0.0] = 1.0
    return normals / lengths


def unit_cube(name: str = "cube") -> MeshAsset:
    """Axis-aligned cube spanning [-0.5, 0.5]^3, flat per-face normals, CCW faces."""
    verts = []
    norms = []
    tris = []
    # axis, sign pairs: +x, -x, +y, -y, +z, -z
    for axis in range(3):
        for sign in (1.0, -1.0):
            n = np.zeros(3)
            n[axis] = sign
            u = np.zeros(3)
            u[(axis + 1) % 3] = 1.0
            v = np.cross(n, u)
            base = len(verts)
            for du, dv in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
                verts.append(0.5 * n + 0.5 * du * u + 0.5 * dv * v)
                norms.append(n)
            tris.append((base, base + 1, base + 2))
            tris.append((base, base + 2, base + 3))
    return MeshAsset(name, np.array(verts), np.array(norms), np.array(tris))


def uv_sphere(segments: int = 12, rings: int = 8, name: str = "sphere") -> MeshAsset:
    """Unit-diameter UV sphere centered at the origin."""
    if segments < 3 or rings < 3:
        raise ValueError("uv_sphere needs segments >= 3 and rings >= 3")
    verts = []
    for j in range(rings + 1):
        phi = math.pi * j / rings  # 0 at +z pole
        for i in range(segments):
            theta = 2.0 * math.pi * i / segments
            verts.append(
                (
                    0.5 * math.sin(phi) * math.cos(theta),
                    0.5 * math.sin(phi) * math.sin(theta),
                    0.5 * math.cos(phi),
                )
            )
    tris = []
    for j in range(rings):
        for i in range(segments):
            a = j * segments + i
            b = j * segments + (i + 1) % segments
            c = (j + 1) * segments + i
            d = (j + 1) * segments + (i + 1) % segments
            if j > 0:
                tris.append((a, c, b))
            if j < rings - 1:
                tris.append((b, c, d))
    verts = np.array(verts)
    tris = np.array(tris)
    norms = verts / np.linalg.norm(verts, axis=1, keepdims=True)
    return MeshAsset(name, verts, norms, tris)


def cylinder(segments: int = 16, name: str = "cylinder") -> MeshAsset:
    """Unit cylinder: radius 0.5, z in [0, 1], capped."""
    if segments < 3:
        raise ValueError("cylinder needs segments >= 3")
    verts = []
    norms = []
    tris = []
    # side wall
    for i in range(segments):
        theta = 2.0 * math.pi * i / segments
        x, y = 0.5 * math.cos(theta), 0.5 * math.sin(theta)
        n = (math.cos(theta), math.sin(theta), 0.0)
        verts.append((x, y, 0.0))
        norms.append(n)
        verts.append((x, y, 1.0))
        norms.append(n)
    for i in range(segments):
        a = 2 * i
        b = 2 * ((i + 1) % segments)
        tris.append((a, b, a + 1))
        tris.append((b, b + 1, a + 1))
    # caps
    for z, nz in ((0.0, -1.0), (1.0, 1.0)):
        base = len(verts)
        verts.append((0.0, 0.0, z))
        norms.append((0.0, 0.0, nz))
        for i in range(segments):
            theta = 2.0 * math.pi * i / segments
            verts.append((0.5 * math.cos(theta), 0.5 * math.sin(theta), z))
            norms.append((0.0, 0.0, nz))
        for i in range(segments):
            a = base + 1 + i
            b = base + 1 + (i + 1) % segments
            if nz > 0:
                tris.append((base, a, b))
            else:
                tris.append((base, b, a))
    return MeshAsset(name, np.array(verts), np.array(norms), np.array(tris))


def plane(name: str = "plane") -> MeshAsset:
    """Unit quad in the XY plane, normal +z, spanning [-0.5, 0.5]^2."""
    verts = np.array(
        [(-0.5, -0.5, 0.0), (0.5, -0.5, 0.0), (0.5, 0.5, 0.0), (-0.5, 0.5, 0.0)]
    )
    norms = np.tile([0.0, 0.0, 1.0], (4, 1))
    tris = np.array([(0, 1, 2), (0, 2, 3)])
    return MeshAsset(name, verts, norms, tris)


PRIMITIVES = {
    "cube": unit_cube,
    "sphere": uv_sphere,
    "cylinder": cylinder,
    "plane": plane,
}


def load_obj(path, name: str | None = None) -> MeshAsset:
    """Load a minimal OBJ subset: v, vn, f; convex polygons fan-triangulated.

    vt coordinates and material statements are ignored. Faces may index
    positions with or without normals; if the file carries no normals,
    vertex normals are computed from face geometry.
    """
    positions = []
    file_normals = []
    out_verts = []
    out_norms = []
    tris = []
    corner_cache = {}

    def corner(token: str) -> int:
        if token in corner_cache:
            return corner_cache[token]
        parts = token.split("/")
        vi = int(parts[0])
        vi = vi - 1 if vi > 0 else len(positions) + vi
        ni = None
        if len(parts) == 3 and parts[2]:
            ni = int(parts[2])
            ni = ni - 1 if ni > 0 else len(file_normals) + ni
        idx = len(out_verts)
        out_verts.append(positions[vi])
        out_norms.append(file_normals[ni] if ni is not None else None)
        corner_cache[token] = idx
        return idx

    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                positions.append(tuple(float(c) for c in parts[1:4]))
            elif parts[0] == "vn":
                file_normals.append(tuple(float(c) for c in parts[1:4]))
            elif parts[0] == "f":
                ids = [corner(tok) for tok in parts[1:]]
                if len(ids) < 3:
                    raise ValueError(f"face with fewer than 3 vertices in {path}")
                for k in range(1, len(ids) - 1):
                    tris.append((ids[0], ids[k], ids[k + 1]))
    if not tris:
        raise ValueError(f"no faces found in {path}")
    verts = np.array(out_verts)
    tri_arr = np.array(tris)
    if any(n is None for n in out_norms):
        norms = _vertex_normals(verts, tri_arr)
    else:
        norms = np.array(out_norms)
        lengths = np.linalg.norm(norms, axis=1, keepdims=True)
        lengths[lengths == 0.0] = 1.0
        norms = norms / lengths
    if name is None:
        name = str(path)
    return MeshAsset(name, verts, norms, tri_arr)
