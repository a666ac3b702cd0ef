import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 120_000,
    // the suite drives one shared live service; keep files sequential
    fileParallelism: false,
  },
});
