import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    // The suite boots a real annotation service once per file.
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
