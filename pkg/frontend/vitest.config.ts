import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // the e2e file boots a real service process
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
