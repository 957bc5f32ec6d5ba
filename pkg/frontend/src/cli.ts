#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadManifest, writePredictionLog } from "./io.js";
import { runModel } from "./runner.js";
import type { ModelSpec } from "./models.js";

async function main(): Promise<number> {
  const args = await yargs(hideBin(process.argv))
    .scriptName("gazekit-runner")
    .usage("$0 --manifest bench.jsonl --out log.jsonl (--command CMD | --url URL)")
    .option("manifest", { type: "string", demandOption: true, describe: "benchmark manifest (JSONL)" })
    .option("out", { type: "string", demandOption: true, describe: "prediction log to write (JSONL)" })
    .option("command", { type: "string", describe: "model command; JSON request on stdin, JSON reply on stdout" })
    .option("url", { type: "string", describe: "model HTTP endpoint (POST, JSON body)" })
    .option("model-name", { type: "string", describe: "value for each record's model field" })
    .option("concurrency", { type: "number", default: 4 })
    .option("retries", { type: "number", default: 2, describe: "extra attempts after the first" })
    .option("max-new-tokens", { type: "number", default: 64 })
    .option("timeout-ms", { type: "number", default: 30000, describe: "per-attempt HTTP timeout" })
    .option("retry-delay-ms", { type: "number", default: 250 })
    .option("skip-path-check", { type: "boolean", default: false, describe: "do not require image paths to exist" })
    .conflicts("command", "url")
    .check((argv) => {
      if (!argv.command && !argv.url) {
        throw new Error("one of --command or --url is required");
      }
      return true;
    })
    .strict()
    .help()
    .parse();

  let spec: ModelSpec;
  if (args.command) {
    // split on whitespace; quote-free by design, wrap complex invocations
    // in a script if arguments need spaces
    spec = { kind: "command", argv: args.command.trim().split(/\s+/) };
  } else {
    spec = { kind: "http", url: args.url as string, timeoutMs: args.timeoutMs };
  }

  const entries = loadManifest(args.manifest, { checkPaths: !args.skipPathCheck });
  const records = await runModel(entries, spec, {
    decode: { max_new_tokens: args.maxNewTokens, greedy: true },
    concurrency: args.concurrency,
    maxAttempts: args.retries + 1,
    retryDelayMs: args.retryDelayMs,
    modelName: args.modelName,
  });
  writePredictionLog(records, args.out);

  const failures = records.filter((r) => r.error !== undefined).length;
  process.stdout.write(
    JSON.stringify({ records: records.length, failures, out: args.out }) + "\n",
  );
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    process.stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    process.exit(2);
  });
