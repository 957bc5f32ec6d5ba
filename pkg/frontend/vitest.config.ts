import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // integration tests shell out to the python harness and spawn one stub
    // process per manifest entry, so the ceiling is generous
    testTimeout: 120_000,
    hookTimeout: 30_000,
  },
});
