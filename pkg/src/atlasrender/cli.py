"""Command-line entry points.

`atlasrender bench ...` (also installed as the bare `bench` script) runs the
cumulative-optimization benchmark stages; `serve` starts the HTTP service;
`rollout` prints a deterministic action script with frame checksums for
cross-boundary fidelity checks; `dump` writes PPM frames for golden tests.

Exit codes: 0 success, 2 usage error, 3 hardware backend unavailable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np


def _add_bench_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stage", required=True)
    parser.add_argument("--scenes", type=int, required=True)
    parser.add_argument("--width", type=int, default=64)
    parser.add_argument("--height", type=int, default=64)
    parser.add_argument("--frames", type=int, default=100)
    parser.add_argument("--backend", default="soft")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", dest="fmt", default="json")


def _run_bench(args) -> int:
    from .bench import BenchConfig, BenchUsageError, emit_report, run_benchmark
    from .gpubackend import BackendUnavailableError

    try:
        if args.fmt not in ("json", "csv"):
            raise BenchUsageError(f"unknown report format '{args.fmt}' (json or csv)")
        config = BenchConfig(
            stage=args.stage,
            scenes=args.scenes,
            width=args.width,
            height=args.height,
            frames=args.frames,
            backend=args.backend,
            workers=args.workers,
            seed=args.seed,
        )
        report = run_benchmark(config)
    except BenchUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BackendUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if args.out:
        emit_report(report, args.out, args.fmt)
    print(json.dumps({"fps": report.fps, "wall_seconds": report.wall_seconds,
                      "final_frame_checksum": report.final_frame_checksum}))
    return 0


def _run_rollout(args) -> int:
    from .bench import _action_rngs
    from .env import make_cartpole_env
    from .gpubackend import BackendUnavailableError

    try:
        env = make_cartpole_env(args.scenes, args.width, args.height, backend=args.backend)
    except BackendUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    rngs = _action_rngs(args.seed, 0, args.scenes)
    obs = env.reset(seed=args.seed)
    checksums = [hashlib.sha256(obs.tobytes()).hexdigest()]
    actions_log = []
    for _ in range(args.steps):
        actions = [float(rng.uniform(-1.0, 1.0)) for rng in rngs]
        actions_log.append(actions)
        obs, _, _ = env.step(np.array(actions))
        checksums.append(hashlib.sha256(obs.tobytes()).hexdigest())
    print(json.dumps({"seed": args.seed, "scenes": args.scenes,
                      "actions": actions_log, "checksums": checksums}))
    return 0


def _run_dump(args) -> int:
    from .env import make_cartpole_env
    from .tiling import dump_frames

    env = make_cartpole_env(args.scenes, args.width, args.height)
    obs = env.reset(seed=args.seed)
    paths = dump_frames(obs, args.out_dir)
    print(f"wrote {len(paths)} frames to {args.out_dir}")
    return 0


def _run_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atlasrender")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark stage")
    _add_bench_args(bench)

    rollout = sub.add_parser("rollout", help="deterministic rollout with frame checksums")
    rollout.add_argument("--scenes", type=int, default=2)
    rollout.add_argument("--steps", type=int, default=10)
    rollout.add_argument("--seed", type=int, default=0)
    rollout.add_argument("--width", type=int, default=64)
    rollout.add_argument("--height", type=int, default=64)
    rollout.add_argument("--backend", default="soft")

    dump = sub.add_parser("dump", help="dump reset frames as PPM files")
    dump.add_argument("--scenes", type=int, default=1)
    dump.add_argument("--seed", type=int, default=0)
    dump.add_argument("--width", type=int, default=64)
    dump.add_argument("--height", type=int, default=64)
    dump.add_argument("--out-dir", required=True)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "bench":
        return _run_bench(args)
    if args.command == "rollout":
        return _run_rollout(args)
    if args.command == "dump":
        return _run_dump(args)
    return _run_serve(args)


def bench_entry(argv=None) -> int:
    """The bare `bench` console script."""
    parser = argparse.ArgumentParser(prog="bench")
    _add_bench_args(parser)
    return _run_bench(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
