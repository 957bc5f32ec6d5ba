import * as fs from "node:fs";
import * as path from "node:path";
import { manifestEntrySchema, type ManifestEntry, type PredictionRecord } from "./schema.js";

export interface LoadManifestOptions {
  /** verify each image_path resolves to an existing file (default true) */
  checkPaths?: boolean;
}

/**
 * Read a JSONL benchmark manifest. Blank lines are skipped; anything else
 * must be a JSON object matching the manifest schema. Ids must be unique
 * because the output log is keyed and ordered by them. Relative image paths
 * resolve against the manifest's directory.
 */
export function loadManifest(
  manifestPath: string,
  opts: LoadManifestOptions = {},
): ManifestEntry[] {
  const checkPaths = opts.checkPaths ?? true;
  const baseDir = path.dirname(path.resolve(manifestPath));
  const text = fs.readFileSync(manifestPath, "utf8");
  const entries: ManifestEntry[] = [];
  const seen = new Set<string>();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") continue;
    const lineno = i + 1;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new Error(`line ${lineno}: not valid JSON`);
    }
    const parsed = manifestEntrySchema.safeParse(obj);
    if (!parsed.success) {
      const issue = parsed.error.issues[0];
      throw new Error(`line ${lineno}: ${issue.path.join(".")}: ${issue.message}`);
    }
    const entry = parsed.data;
    if (seen.has(entry.id)) {
      throw new Error(`line ${lineno}: duplicate id ${JSON.stringify(entry.id)}`);
    }
    seen.add(entry.id);
    if (checkPaths) {
      const resolved = path.isAbsolute(entry.image_path)
        ? entry.image_path
        : path.join(baseDir, entry.image_path);
      if (!fs.existsSync(resolved)) {
        throw new Error(`line ${lineno}: image_path not found: ${entry.image_path}`);
      }
    }
    entries.push(entry);
  }
  return entries;
}

const RECORD_KEY_ORDER: (keyof PredictionRecord)[] = [
  "id",
  "benchmark",
  "label",
  "output",
  "gen_len",
  "generator",
  "person_count",
  "model",
  "error",
  "retries",
];

export function recordToLine(record: PredictionRecord): string {
  const obj: Record<string, unknown> = {};
  for (const key of RECORD_KEY_ORDER) {
    const value = record[key];
    if (value !== undefined) {
      obj[key] = value;
    }
  }
  return JSON.stringify(obj);
}

/** Write records as JSONL, one per line, omitting absent optional fields. */
export function writePredictionLog(records: PredictionRecord[], outPath: string): void {
  const body = records.map(recordToLine).join("\n");
  fs.writeFileSync(outPath, body + (records.length ? "\n" : ""));
}
