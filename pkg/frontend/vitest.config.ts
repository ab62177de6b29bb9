import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // the session test drives a live server through a whole episode
    testTimeout: 300_000,
    hookTimeout: 180_000,
  },
});
