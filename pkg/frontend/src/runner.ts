import { attemptWithRetries, INITIAL_RETRY_DELAY } from "./retry.js";
import {
  DEFAULT_DECODE,
  invokeModel,
  type DecodeParams,
  type ModelRequest,
  type ModelSpec,
} from "./models.js";
import type { ManifestEntry, PredictionRecord } from "./schema.js";

export interface RunOptions {
  decode?: Partial<DecodeParams>;
  /** parallel in-flight model calls (default 4) */
  concurrency?: number;
  /** total tries per record including the first (default 3) */
  maxAttempts?: number;
  retryDelayMs?: number;
  /** stamped into each record's `model` field when given */
  modelName?: string;
}

/**
 * Drive the model over every manifest entry and return one prediction
 * record per entry, sorted by id. Failures never drop a record: after the
 * retry budget is spent the record is kept with an empty output plus the
 * error and retry count, and scoring will treat it as unparseable.
 */
export async function runModel(
  entries: ManifestEntry[],
  spec: ModelSpec,
  opts: RunOptions = {},
): Promise<PredictionRecord[]> {
  const decode: DecodeParams = { ...DEFAULT_DECODE, ...opts.decode };
  const concurrency = Math.max(1, opts.concurrency ?? 4);
  const maxAttempts = Math.max(1, opts.maxAttempts ?? 3);
  const retryDelayMs = opts.retryDelayMs ?? INITIAL_RETRY_DELAY;

  const results: PredictionRecord[] = new Array(entries.length);
  let next = 0;

  async function worker(): Promise<void> {
    while (true) {
      const i = next++;
      if (i >= entries.length) return;
      const entry = entries[i];
      const req: ModelRequest = {
        id: entry.id,
        image_path: entry.image_path,
        max_new_tokens: decode.max_new_tokens,
        greedy: decode.greedy,
      };
      const attempt = await attemptWithRetries(
        () => invokeModel(spec, req),
        maxAttempts,
        retryDelayMs,
      );
      const record: PredictionRecord = {
        id: entry.id,
        benchmark: entry.benchmark,
        label: entry.label,
        output: attempt.value ? attempt.value.output : "",
      };
      if (attempt.value?.gen_len !== undefined) {
        record.gen_len = attempt.value.gen_len;
      }
      if (entry.generator !== undefined) record.generator = entry.generator;
      if (entry.person_count !== undefined) record.person_count = entry.person_count;
      if (opts.modelName !== undefined) record.model = opts.modelName;
      if (attempt.error !== undefined) record.error = attempt.error;
      if (attempt.retries > 0 || attempt.error !== undefined) {
        record.retries = attempt.retries;
      }
      results[i] = record;
    }
  }

  const workers = Array.from(
    { length: Math.min(concurrency, Math.max(entries.length, 1)) },
    () => worker(),
  );
  await Promise.all(workers);

  return results
    .slice()
    .sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
}
