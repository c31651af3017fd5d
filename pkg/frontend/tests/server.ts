import { spawn, spawnSync, type ChildProcess } from "node:child_process";

export interface ServerHandle {
    baseUrl: string;
    stop: () => void;
}

/** Start the Python service on a free port and wait until it answers. */
export async function startServer(): Promise<ServerHandle> {
    const port = 8100 + Math.floor(Math.random() * 400);
    const proc: ChildProcess = spawn(
        "python3",
        ["-m", "atlasrender.cli", "serve", "--host", "127.0.0.1", "--port", String(port)],
        { stdio: ["ignore", "ignore", "pipe"] },
    );
    let stderr = "";
    proc.stderr?.on("data", (chunk) => (stderr += chunk));

    const baseUrl = `http://127.0.0.1:${port}`;
    for (let i = 0; i < 100; i++) {
        if (proc.exitCode !== null) {
            throw new Error(`service exited early (code ${proc.exitCode}): ${stderr}`);
        }
        try {
            const resp = await fetch(`${baseUrl}/health`);
            if (resp.ok) {
                return { baseUrl, stop: () => proc.kill("SIGTERM") };
            }
        } catch {
            // not up yet
        }
        await new Promise((r) => setTimeout(r, 100));
    }
    proc.kill("SIGTERM");
    throw new Error(`service did not come up on ${baseUrl}: ${stderr}`);
}

export interface RolloutScript {
    seed: number;
    scenes: number;
    actions: number[][];
    checksums: string[];
}

/** Deterministic action script + frame checksums from the reference CLI. */
export function referenceRollout(
    scenes: number,
    steps: number,
    seed: number,
    width: number,
    height: number,
): RolloutScript {
    const out = spawnSync(
        "python3",
        [
            "-m", "atlasrender.cli", "rollout",
            "--scenes", String(scenes), "--steps", String(steps), "--seed", String(seed),
            "--width", String(width), "--height", String(height),
        ],
        { encoding: "utf8" },
    );
    if (out.status !== 0) {
        throw new Error(`rollout failed: ${out.stderr}`);
    }
    return JSON.parse(out.stdout) as RolloutScript;
}
