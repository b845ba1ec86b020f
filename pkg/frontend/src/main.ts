// Entry point. The only configuration is the API base URL: query parameter
// `api`, a global set by the host page, or the page's own origin.

import { ApiClient } from './api.js';
import { mountEditor } from './editor.js';

declare global {
  interface Window {
    BLOCKBENCH_API?: string;
  }
}

export function apiBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('api') ?? window.BLOCKBENCH_API ?? window.location.origin;
}

const root = document.getElementById('app');
if (root) {
  void mountEditor(root, new ApiClient(apiBaseUrl()));
}
