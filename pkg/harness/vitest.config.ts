import { defineConfig } from "vitest/config";

// The end-to-end test emits and executes the full ten-operator corpus,
// which takes tens of seconds.
export default defineConfig({
  test: {
    testTimeout: 240_000,
    hookTimeout: 240_000,
  },
});
