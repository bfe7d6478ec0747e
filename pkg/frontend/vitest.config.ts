import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globals: true,
    environment: "happy-dom",
    // the e2e suite talks to a real local service on a random port
    environmentOptions: {
      happyDOM: {
        settings: { fetch: { disableSameOriginPolicy: true } },
      },
    },
    testTimeout: 20_000,
    hookTimeout: 60_000,
  },
});
