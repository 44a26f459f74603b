import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the live server test boots a real service process
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
