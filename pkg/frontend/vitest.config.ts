import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the feed test boots the real Python service and runs transfers
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
