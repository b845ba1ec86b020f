// Editor-side state. The server owns all validation and styling; this module
// only tracks what the editor is looking at and gates writes.

import type { ChangeSetBody, Diagnostic, ModelBody } from './types.js';

export interface Selection {
  kind: string;
  name: string;
}

/** Diagnostics are only trusted for the model version they were computed for. */
export interface DiagnosticsCache {
  version: number;
  diagnostics: Diagnostic[];
}

export interface EditorState {
  modelId: string | null;
  model: ModelBody | null;
  lastKnownVersion: number;
  selection: Selection | null;
  pendingChangeSet: ChangeSetBody | null;
  diagnosticsCache: DiagnosticsCache | null;
  sessionId: string | null;
}

export function emptyState(): EditorState {
  return {
    modelId: null,
    model: null,
    lastKnownVersion: 0,
    selection: null,
    pendingChangeSet: null,
    diagnosticsCache: null,
    sessionId: null
  };
}

/** Diagnostics to display, or null if the cache is stale for this version. */
export function currentDiagnostics(state: EditorState): Diagnostic[] | null {
  if (state.diagnosticsCache === null) return null;
  if (state.diagnosticsCache.version !== state.lastKnownVersion) return null;
  return state.diagnosticsCache.diagnostics;
}

/**
 * Serializes writes: at most one is in flight at any time. Reads may overlap
 * a write freely; committing while a write is pending is refused outright so
 * a slow response can never interleave two change sets.
 */
export class WriteGate {
  private busy = false;

  get inFlight(): boolean {
    return this.busy;
  }

  async run<T>(task: () => Promise<T>): Promise<T> {
    if (this.busy) {
      throw new Error('a write is already in flight');
    }
    this.busy = true;
    try {
      return await task();
    } finally {
      this.busy = false;
    }
  }
}
