"""Benchmark harness: cumulative-optimization stages with counter reports.

Stages select the render path on a cart-pole batch driven by seeded random
actions. FPS counts observation frames per wall-second summed over scenes;
timing includes the stub dynamics step (recorded in the report schema).
Counter laws are machine-checked on every run, not only in tests.
"""

from __future__ import annotations

import csv
import hashlib
import json
import multiprocessing as mp
import os
import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .env import CartPoleParams, make_cartpole_env
from .softbackend import RenderStats

STAGES = ("naive", "tiled", "readback", "instanced", "workers")
BACKENDS = ("soft", "gpu")
WARMUP_FRAMES = 10


class BenchUsageError(ValueError):
    """Invalid stage/backend/worker combination; maps to exit code 2."""


@dataclass(frozen=True)
class BenchConfig:
    stage: str
    scenes: int
    width: int = 64
    height: int = 64
    frames: int = 100
    backend: str = "soft"
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.stage not in STAGES:
            raise BenchUsageError(f"unknown stage '{self.stage}' (choose from {STAGES})")
        if self.backend not in BACKENDS:
            raise BenchUsageError(f"unknown backend '{self.backend}' (choose from {BACKENDS})")
        if self.scenes < 1 or self.frames < 1:
            raise BenchUsageError("scenes and frames must be ≥ 1")
        if self.workers < 1:
            raise BenchUsageError("workers must be ≥ 1")
        if self.workers > 1 and self.stage != "workers":
            raise BenchUsageError("workers > 1 requires stage=workers")
        if self.stage == "workers" and self.scenes % self.workers != 0:
            raise BenchUsageError("scenes must be divisible by workers")


@dataclass
class WorkerResult:
    worker: int
    scenes: int
    wall_seconds: float
    fps: float
    stats: RenderStats
    scene_checksums: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stats"] = self.stats.to_dict()
        return d


@dataclass
class BenchReport:
    config: BenchConfig
    wall_seconds: float
    fps: float
    stats: RenderStats
    workers: list  # WorkerResult
    host: dict
    final_frame_checksum: str
    readback_noop: bool = False
    timing_includes_dynamics: bool = True

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "wall_seconds": self.wall_seconds,
            "fps": self.fps,
            "stats": self.stats.to_dict(),
            "workers": [w.to_dict() for w in self.workers],
            "host": self.host,
            "final_frame_checksum": self.final_frame_checksum,
            "readback_noop": self.readback_noop,
            "timing_includes_dynamics": self.timing_includes_dynamics,
        }

    @staticmethod
    def from_dict(d: dict) -> "BenchReport":
        workers = [
            WorkerResult(
                worker=w["worker"],
                scenes=w["scenes"],
                wall_seconds=w["wall_seconds"],
                fps=w["fps"],
                stats=RenderStats.from_dict(w["stats"]),
                scene_checksums=w["scene_checksums"],
            )
            for w in d["workers"]
        ]
        return BenchReport(
            config=BenchConfig(**d["config"]),
            wall_seconds=d["wall_seconds"],
            fps=d["fps"],
            stats=RenderStats.from_dict(d["stats"]),
            workers=workers,
            host=d["host"],
            final_frame_checksum=d["final_frame_checksum"],
            readback_noop=d["readback_noop"],
            timing_includes_dynamics=d["timing_includes_dynamics"],
        )


def _host_metadata() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
    }


def _scene_checksums(obs: np.ndarray) -> list:
    return [hashlib.sha256(obs[s].tobytes()).hexdigest() for s in range(obs.shape[0])]


def _combined_checksum(scene_checksums: list) -> str:
    return hashlib.sha256("".join(scene_checksums).encode()).hexdigest()


def _action_rngs(seed: int, scene_offset: int, count: int) -> list:
    return [np.random.default_rng([seed, scene_offset + s, 1]) for s in range(count)]


def _run_shard(
    config: BenchConfig, scenes: int, scene_offset: int, worker: int, params: CartPoleParams
) -> WorkerResult:
    render_mode = {
        "naive": "naive",
        "tiled": "tiled",
        "readback": "tiled",
        "instanced": "instanced",
        "workers": "instanced",
    }[config.stage]
    env = make_cartpole_env(
        scenes, config.width, config.height, backend=config.backend,
        render_mode=render_mode, params=params,
    )
    action_rngs = _action_rngs(config.seed, scene_offset, scenes)

    def draw_actions():
        return np.array([rng.uniform(-1.0, 1.0) for rng in action_rngs])

    env.reset(seed=config.seed, scene_offset=scene_offset)
    for _ in range(WARMUP_FRAMES):
        env.step(draw_actions())

    before = RenderStats(**env.renderer.stats.to_dict())
    t0 = time.perf_counter()
    obs = None
    for _ in range(config.frames):
        obs, _, _ = env.step(draw_actions())
    wall = time.perf_counter() - t0
    after = env.renderer.stats
    delta = RenderStats(
        target_binds=after.target_binds - before.target_binds,
        draw_calls=after.draw_calls - before.draw_calls,
        instances_drawn=after.instances_drawn - before.instances_drawn,
        matrix_uploads=after.matrix_uploads - before.matrix_uploads,
        frames_produced=after.frames_produced - before.frames_produced,
    )
    return WorkerResult(
        worker=worker,
        scenes=scenes,
        wall_seconds=wall,
        fps=scenes * config.frames / wall,
        stats=delta,
        scene_checksums=_scene_checksums(obs),
    )


def _worker_entry(config_dict, scenes, scene_offset, worker, params_dict, queue):
    config = BenchConfig(**config_dict)
    result = _run_shard(config, scenes, scene_offset, worker, CartPoleParams(**params_dict))
    queue.put(result.to_dict())


def run_benchmark(config: BenchConfig, params: CartPoleParams = CartPoleParams()) -> BenchReport:
    if config.stage == "workers":
        k = config.workers
        shard = config.scenes // k
        ctx = mp.get_context("fork" if hasattr(os, "fork") else "spawn")
        queue = ctx.Queue()
        procs = []
        t0 = time.perf_counter()
        for w in range(k):
            p = ctx.Process(
                target=_worker_entry,
                args=(asdict(config), shard, w * shard, w, asdict(params), queue),
            )
            p.start()
            procs.append(p)
        raw = [queue.get() for _ in procs]
        for p in procs:
            p.join()
        wall = time.perf_counter() - t0
        raw.sort(key=lambda d: d["worker"])
        workers = [
            WorkerResult(
                worker=d["worker"],
                scenes=d["scenes"],
                wall_seconds=d["wall_seconds"],
                fps=d["fps"],
                stats=RenderStats.from_dict(d["stats"]),
                scene_checksums=d["scene_checksums"],
            )
            for d in raw
        ]
        totals = RenderStats()
        checksums = []
        for w in workers:
            totals.add(w.stats)
            checksums.extend(w.scene_checksums)
        report = BenchReport(
            config=config,
            wall_seconds=wall,
            fps=sum(w.fps for w in workers),
            stats=totals,
            workers=workers,
            host=_host_metadata(),
            final_frame_checksum=_combined_checksum(checksums),
        )
    else:
        result = _run_shard(config, config.scenes, 0, 0, params)
        report = BenchReport(
            config=config,
            wall_seconds=result.wall_seconds,
            fps=result.fps,
            stats=result.stats,
            workers=[result],
            host=_host_metadata(),
            final_frame_checksum=_combined_checksum(result.scene_checksums),
            readback_noop=(config.stage == "readback" and config.backend == "soft"),
        )
    verify_counter_laws(report)
    return report


def verify_counter_laws(report: BenchReport) -> None:
    """Post-condition on every report: the ablation counters are exact."""
    cfg = report.config
    n = cfg.frames
    groups = 3  # cart-pole scene: ground, cart, pole
    instances_per_scene = 3
    for w in report.workers:
        s = w.scenes
        stats = w.stats
        if cfg.stage == "naive":
            expect_binds = s * n
            expect_draws = s * instances_per_scene * n
        elif cfg.stage in ("tiled", "readback"):
            expect_binds = n
            expect_draws = s * instances_per_scene * n
        else:  # instanced, workers
            expect_binds = n
            expect_draws = groups * n
        if stats.target_binds != expect_binds:
            raise AssertionError(
                f"counter law violated: target_binds {stats.target_binds} != {expect_binds}"
            )
        if stats.draw_calls != expect_draws:
            raise AssertionError(
                f"counter law violated: draw_calls {stats.draw_calls} != {expect_draws}"
            )
        if stats.frames_produced != s * n:
            raise AssertionError(
                f"counter law violated: frames_produced {stats.frames_produced} != {s * n}"
            )


def emit_report(report: BenchReport, path, fmt: str = "json") -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    elif fmt == "csv":
        cfg = report.config
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "stage", "worker", "scenes", "width", "height", "frames", "backend",
                    "seed", "wall_seconds", "fps", "target_binds", "draw_calls",
                    "instances_drawn", "matrix_uploads", "frames_produced",
                ]
            )
            for w in report.workers:
                writer.writerow(
                    [
                        cfg.stage, w.worker, w.scenes, cfg.width, cfg.height, cfg.frames,
                        cfg.backend, cfg.seed, w.wall_seconds, w.fps,
                        w.stats.target_binds, w.stats.draw_calls, w.stats.instances_drawn,
                        w.stats.matrix_uploads, w.stats.frames_produced,
                    ]
                )
    else:
        raise BenchUsageError(f"unknown report format '{fmt}' (json or csv)")


def parse_report(path) -> BenchReport:
    with open(path) as fh:
        return BenchReport.from_dict(json.load(fh))
