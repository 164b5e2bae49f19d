import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      // dev mode proxies API calls to a locally running `lacunalm serve`
      "/models": "http://127.0.0.1:8000",
      "/predict": "http://127.0.0.1:8000",
      "/rank": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
