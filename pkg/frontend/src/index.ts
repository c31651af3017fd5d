export {
    AtlasClient,
    EnvSession,
    ServiceError,
    type CreateEnvOptions,
    type Observation,
    type ObsShape,
    type RenderStats,
    type StepResult,
} from "./client.js";
