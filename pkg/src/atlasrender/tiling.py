"""Atlas grid planning and partitioning of rendered atlases into frames.

Scene s occupies row s // cols, column s % cols; row 0 is the top of the
atlas, matching the top-left image origin of FrameBatch arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mathcore import ClipRemap, clip_remap_for_tile


class LayoutError(ValueError):
    """Atlas layout cannot be built within device limits."""


@dataclass(frozen=True)
class TileLayout:
    scene_count: int
    cols: int
    rows: int
    tile_width: int
    tile_height: int

    @property
    def atlas_width(self) -> int:
        return self.cols * self.tile_width

    @property
    def atlas_height(self) -> int:
        return self.rows * self.tile_height


@dataclass(frozen=True)
class PixelRect:
    x0: int
    y0: int
    width: int
    height: int


def plan_layout(scene_count: int, tile_width: int, tile_height: int, max_atlas_dim: int = 16384) -> TileLayout:
    """Square-ish row-major grid: cols = ceil(sqrt(S)), rows = ceil(S / cols)."""
    if scene_count < 1:
        raise LayoutError("scene_count must be ≥ 1")
    if tile_width < 1 or tile_height < 1:
        raise LayoutError("tile dimensions must be ≥ 1")
    cols = math.isqrt(scene_count)
    if cols * cols < scene_count:
        cols += 1
    rows = (scene_count + cols - 1) // cols
    layout = TileLayout(scene_count, cols, rows, tile_width, tile_height)
    if layout.atlas_width > max_atlas_dim or layout.atlas_height > max_atlas_dim:
        raise LayoutError(
            f"atlas {layout.atlas_width}x{layout.atlas_height} exceeds max dimension "
            f"{max_atlas_dim}; shard scenes across multiple renderer instances"
        )
    return layout


def tile_rect(layout: TileLayout, scene: int) -> tuple[PixelRect, ClipRemap]:
    """Pixel rectangle and matching clip remap for a scene's tile."""
    if not 0 <= scene < layout.scene_count:
        raise LayoutError(f"scene index {scene} out of range [0, {layout.scene_count})")
    row, col = scene // layout.cols, scene % layout.cols
    rect = PixelRect(col * layout.tile_width, row * layout.tile_height, layout.tile_width, layout.tile_height)
    return rect, clip_remap_for_tile(layout.rows, layout.cols, row, col)


def partition_atlas(atlas: np.ndarray, layout: TileLayout) -> np.ndarray:
    """Cut the atlas into a contiguous (S, H, W, 4) frame batch; blank tiles dropped."""
    expected = (layout.atlas_height, layout.atlas_width, 4)
    if atlas.shape != expected:
        raise LayoutError(f"atlas shape {atlas.shape} does not match layout {expected}")
    h, w = layout.tile_height, layout.tile_width
    frames = np.empty((layout.scene_count, h, w, 4), dtype=np.uint8)
    for s in range(layout.scene_count):
        rect, _ = tile_rect(layout, s)
        frames[s] = atlas[rect.y0 : rect.y0 + h, rect.x0 : rect.x0 + w]
    return frames


def stitch_frames(frames: np.ndarray, layout: TileLayout, fill: tuple = (0, 0, 0, 255)) -> np.ndarray:
    """Inverse of partition_atlas on used tiles; blank tiles take the fill color."""
    if frames.shape != (layout.scene_count, layout.tile_height, layout.tile_width, 4):
        raise LayoutError(f"frame batch shape {frames.shape} does not match layout")
    atlas = np.empty((layout.atlas_height, layout.atlas_width, 4), dtype=np.uint8)
    atlas[:] = np.asarray(fill, dtype=np.uint8)
    for s in range(layout.scene_count):
        rect, _ = tile_rect(layout, s)
        atlas[rect.y0 : rect.y0 + rect.height, rect.x0 : rect.x0 + rect.width] = frames[s]
    return atlas


def write_ppm(frame: np.ndarray, path) -> None:
    """Write one RGBA frame as binary PPM (P6); alpha is dropped."""
    h, w = frame.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(np.ascontiguousarray(frame[:, :, :3]).tobytes())


def dump_frames(frames: np.ndarray, out_dir) -> list:
    """Dump every frame as frame_<s>.ppm under out_dir; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in range(frames.shape[0]):
        path = out / f"frame_{s}.ppm"
        write_ppm(frames[s], path)
        paths.append(path)
    return paths
