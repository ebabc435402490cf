import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // The round-trip test boots the real notice service in a child process.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
