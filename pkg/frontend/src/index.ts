export {
  manifestEntrySchema,
  modelReplySchema,
  type ManifestEntry,
  type ModelReply,
  type PredictionRecord,
} from "./schema.js";
export {
  AUTH_TOKEN_VAR,
  DEFAULT_DECODE,
  invokeModel,
  type DecodeParams,
  type ModelRequest,
  type ModelSpec,
} from "./models.js";
export { loadManifest, recordToLine, writePredictionLog } from "./io.js";
export { runModel, type RunOptions } from "./runner.js";
export { attemptWithRetries, backoffDelay, sleep } from "./retry.js";
