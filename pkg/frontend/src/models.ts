import { spawn } from "node:child_process";
import { modelReplySchema, type ModelReply } from "./schema.js";

export interface DecodeParams {
  max_new_tokens: number;
  greedy: boolean;
}

export const DEFAULT_DECODE: DecodeParams = { max_new_tokens: 64, greedy: true };

export const AUTH_TOKEN_VAR = "RUNNER_API_TOKEN";

/**
 * How to reach the model. Either a local command that speaks JSON over
 * stdin/stdout (one process per request), or an HTTP endpoint that accepts
 * the same request object as a POST body. The runner never embeds model
 * weights or an inference framework; wrapping those is the backend's job.
 */
export type ModelSpec =
  | { kind: "command"; argv: string[] }
  | { kind: "http"; url: string; timeoutMs?: number };

export interface ModelRequest {
  id: string;
  image_path: string;
  max_new_tokens: number;
  greedy: boolean;
}

const DEFAULT_HTTP_TIMEOUT_MS = 30_000;

function runCommand(argv: string[], req: ModelRequest): Promise<ModelReply> {
  return new Promise((resolve, reject) => {
    const child = spawn(argv[0], argv.slice(1), {
      stdio: ["pipe", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (d) => (stdout += d));
    child.stderr.on("data", (d) => (stderr += d));
    child.on("error", (err) => reject(new Error(`spawn failed: ${err.message}`)));
    child.on("close", (code) => {
      if (code !== 0) {
        const hint = stderr.trim().slice(0, 200);
        reject(new Error(`command exited with code ${code}${hint ? `: ${hint}` : ""}`));
        return;
      }
      try {
        resolve(modelReplySchema.parse(JSON.parse(stdout)));
      } catch (err) {
        reject(new Error(`bad reply from command: ${err instanceof Error ? err.message : err}`));
      }
    });
    child.stdin.write(JSON.stringify(req) + "\n");
    child.stdin.end();
  });
}

async function callEndpoint(
  url: string,
  timeoutMs: number,
  req: ModelRequest,
): Promise<ModelReply> {
  const headers: Record<string, string> = { "Content-Type": "application/json" };
  const token = process.env[AUTH_TOKEN_VAR];
  if (token) {
    headers["Authorization"] = `Bearer ${token}`;
  }
  const response = await fetch(url, {
    method: "POST",
    headers,
    body: JSON.stringify(req),
    signal: AbortSignal.timeout(timeoutMs),
  });
  if (!response.ok) {
    throw new Error(`HTTP ${response.status} from model endpoint`);
  }
  return modelReplySchema.parse(await response.json());
}

/** Issue one model call. Throws on any transport or reply-shape problem. */
export function invokeModel(spec: ModelSpec, req: ModelRequest): Promise<ModelReply> {
  if (spec.kind === "command") {
    return runCommand(spec.argv, req);
  }
  return callEndpoint(spec.url, spec.timeoutMs ?? DEFAULT_HTTP_TIMEOUT_MS, req);
}
