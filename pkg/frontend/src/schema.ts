import { z } from "zod";

/**
 * One row of a benchmark manifest: the image to show the model plus the
 * ground truth and slicing metadata the scoring side needs. `image_path`
 * must resolve to a readable file when the run starts.
 */
export const manifestEntrySchema = z.object({
  id: z.string().min(1),
  image_path: z.string().min(1),
  label: z.enum(["real", "fake"]),
  benchmark: z.string().min(1),
  generator: z.string().optional(),
  person_count: z.number().int().positive().optional(),
});

export type ManifestEntry = z.infer<typeof manifestEntrySchema>;

/**
 * One line of the emitted prediction log. Field names and types mirror the
 * harness's log schema exactly; `error` and `retries` are extra metadata the
 * harness ignores. A failed model call keeps its row with `output: ""` so
 * the log always has one record per manifest entry.
 */
export interface PredictionRecord {
  id: string;
  benchmark: string;
  label: "real" | "fake";
  output: string;
  gen_len?: number;
  generator?: string;
  person_count?: number;
  model?: string;
  error?: string;
  retries?: number;
}

/**
 * What a model backend must return for one request. `gen_len` is the
 * model's own token count for the completion; backends that do not report
 * one must omit the field rather than estimate it.
 */
export const modelReplySchema = z.object({
  output: z.string(),
  gen_len: z.number().int().nonnegative().optional(),
});

export type ModelReply = z.infer<typeof modelReplySchema>;
