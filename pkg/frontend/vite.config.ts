import { defineConfig } from 'vitest/config';

// Dev server proxies API calls to a locally running service
// (`museumtwin serve --listen 127.0.0.1:8077`).
export default defineConfig({
  server: {
    proxy: {
      '/spaces': 'http://127.0.0.1:8077',
      '/sessions': 'http://127.0.0.1:8077',
    },
  },
  build: {
    outDir: 'dist',
  },
  test: {
    environment: 'node',
  },
});
