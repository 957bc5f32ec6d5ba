import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { execFile } from "node:child_process";
import { fileURLToPath } from "node:url";
import type { ManifestEntry } from "../src/schema.js";

export const STUB_DIR = fileURLToPath(new URL("./stubs/", import.meta.url));

export function stubCommand(name: string): string[] {
  return ["node", path.join(STUB_DIR, name)];
}

export function tmpDir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

/** Make n manifest entries sharing one placeholder image inside dir. */
export function makeEntries(
  dir: string,
  n: number,
  make: (i: number) => Partial<ManifestEntry> & { id: string; label: "real" | "fake" },
): ManifestEntry[] {
  const img = path.join(dir, "shared.png");
  if (!fs.existsSync(img)) {
    fs.writeFileSync(img, "not really pixels");
  }
  const entries: ManifestEntry[] = [];
  for (let i = 0; i < n; i++) {
    const over = make(i);
    entries.push({
      image_path: img,
      benchmark: "probe",
      ...over,
    } as ManifestEntry);
  }
  return entries;
}

export function writeManifest(dir: string, entries: ManifestEntry[]): string {
  const p = path.join(dir, "manifest.jsonl");
  fs.writeFileSync(p, entries.map((e) => JSON.stringify(e)).join("\n") + "\n");
  return p;
}

export interface ExecResult {
  code: number;
  stdout: string;
  stderr: string;
}

export function run(cmd: string, args: string[], env?: NodeJS.ProcessEnv): Promise<ExecResult> {
  return new Promise((resolve) => {
    execFile(cmd, args, { env: env ?? process.env }, (err, stdout, stderr) => {
      const code = err && typeof (err as any).code === "number" ? (err as any).code : err ? 1 : 0;
      resolve({ code, stdout, stderr });
    });
  });
}

/** Score a prediction log with the python harness CLI. */
export function runEval(logPath: string, outDir: string): Promise<ExecResult> {
  return run("gazekit", ["eval", "--log", logPath, "--out-dir", outDir]);
}

export function readScores(outDir: string): any {
  return JSON.parse(fs.readFileSync(path.join(outDir, "scores.json"), "utf8"));
}

/** Deterministic in-place shuffle so manifests are not already id-sorted. */
export function shuffle<T>(items: T[], seed: number): T[] {
  let s = seed >>> 0;
  const rand = () => {
    // xorshift32; quality is irrelevant, determinism is the point
    s ^= s << 13;
    s >>>= 0;
    s ^= s >> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0xffffffff;
  };
  for (let i = items.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [items[i], items[j]] = [items[j], items[i]];
  }
  return items;
}
