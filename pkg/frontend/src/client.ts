import { z } from "zod";

const obsShape = z.tuple([z.number(), z.number(), z.number(), z.number()]);

const createEnvResponse = z.object({
    env_id: z.string(),
    obs_shape: obsShape,
});

const observationPayload = z.object({
    observations: z.string(),
    shape: obsShape,
    dtype: z.literal("uint8"),
    checksum: z.string(),
});

const stepResponse = observationPayload.extend({
    rewards: z.array(z.number()),
    dones: z.array(z.boolean()),
});

const statsResponse = z.object({
    target_binds: z.number(),
    draw_calls: z.number(),
    instances_drawn: z.number(),
    matrix_uploads: z.number(),
    frames_produced: z.number(),
});

export type ObsShape = [number, number, number, number];
export type RenderStats = z.infer<typeof statsResponse>;

export interface Observation {
    /** Raw RGBA bytes, C-order over (scene, row, col, channel). The buffer is
     *  owned by the session and overwritten by the next reset/step. */
    data: Uint8Array;
    shape: ObsShape;
    /** sha256 hex of the raw bytes, as computed by the server. */
    checksum: string;
}

export interface StepResult extends Observation {
    rewards: number[];
    dones: boolean[];
}

export interface CreateEnvOptions {
    scenes: number;
    width?: number;
    height?: number;
    backend?: string;
    renderMode?: string;
}

export class ServiceError extends Error {
    constructor(readonly status: number, detail: string) {
        super(detail);
        this.name = "ServiceError";
    }
}

async function request(url: string, init?: RequestInit): Promise<unknown> {
    const resp = await fetch(url, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
        const detail = (body as { detail?: unknown }).detail;
        throw new ServiceError(
            resp.status,
            typeof detail === "string" ? detail : JSON.stringify(detail ?? body),
        );
    }
    return body;
}

function post(url: string, payload: unknown): Promise<unknown> {
    return request(url, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
    });
}

export class AtlasClient {
    constructor(readonly baseUrl: string) {}

    async health(): Promise<boolean> {
        const body = (await request(`${this.baseUrl}/health`)) as { status?: string };
        return body.status === "ok";
    }

    async createEnv(opts: CreateEnvOptions): Promise<EnvSession> {
        const body = createEnvResponse.parse(
            await post(`${this.baseUrl}/envs`, {
                scenes: opts.scenes,
                width: opts.width ?? 64,
                height: opts.height ?? 64,
                backend: opts.backend ?? "soft",
                render_mode: opts.renderMode ?? "instanced",
            }),
        );
        return new EnvSession(this.baseUrl, body.env_id, body.obs_shape as ObsShape);
    }

    async runBenchmark(config: {
        stage: string;
        scenes: number;
        width?: number;
        height?: number;
        frames?: number;
        backend?: string;
        workers?: number;
        seed?: number;
    }): Promise<Record<string, unknown>> {
        return (await post(`${this.baseUrl}/benchmarks`, config)) as Record<string, unknown>;
    }
}

export class EnvSession {
    private buf: Uint8Array;

    constructor(
        private readonly baseUrl: string,
        readonly envId: string,
        readonly obsShape: ObsShape,
    ) {
        const [s, h, w, c] = obsShape;
        this.buf = new Uint8Array(s * h * w * c);
    }

    private decode(payload: z.infer<typeof observationPayload>): Observation {
        const raw = Buffer.from(payload.observations, "base64");
        if (raw.byteLength !== this.buf.byteLength) {
            throw new Error(
                `frame payload is ${raw.byteLength} bytes, expected ${this.buf.byteLength}`,
            );
        }
        this.buf.set(raw);
        return { data: this.buf, shape: payload.shape as ObsShape, checksum: payload.checksum };
    }

    async reset(seed = 0): Promise<Observation> {
        const body = observationPayload.parse(
            await post(`${this.baseUrl}/envs/${this.envId}/reset`, { seed }),
        );
        return this.decode(body);
    }

    async step(actions: number[]): Promise<StepResult> {
        const body = stepResponse.parse(
            await post(`${this.baseUrl}/envs/${this.envId}/step`, { actions }),
        );
        return { ...this.decode(body), rewards: body.rewards, dones: body.dones };
    }

    async stats(): Promise<RenderStats> {
        return statsResponse.parse(await request(`${this.baseUrl}/envs/${this.envId}/stats`));
    }

    async close(): Promise<void> {
        await request(`${this.baseUrl}/envs/${this.envId}`, { method: "DELETE" });
    }
}
