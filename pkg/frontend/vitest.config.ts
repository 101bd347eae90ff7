import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    globals: true,
    // the e2e suite boots a real service subprocess
    hookTimeout: 60_000,
    testTimeout: 60_000,
  },
});
