import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'happy-dom',
    // The page runs on its own origin and reaches the service cross-origin,
    // exactly like a deployed UI; the service allows it via --cors-origin.
    environmentOptions: {
      happyDOM: { url: 'http://localhost:3000' }
    },
    include: ['tests/**/*.test.ts'],
    // Each test file boots its own service process; leave headroom for that.
    testTimeout: 30000,
    hookTimeout: 60000
  }
});
