// Editor state invariants: the write gate refuses overlap, and cached
// diagnostics are only reported for the version they were computed against.

import { describe, expect, it } from 'vitest';
import { WriteGate, currentDiagnostics, emptyState } from '../src/state.js';
import type { Diagnostic } from '../src/types.js';

const someDiagnostic: Diagnostic = {
  code: 'N5',
  severity: 'warning',
  targets: ['lonely'],
  message: 'isolated',
  nuanceMarker: null,
  explanation: 'isolated'
};

describe('WriteGate', () => {
  it('runs tasks one at a time and refuses overlap', async () => {
    const gate = new WriteGate();
    let release!: () => void;
    const blocked = new Promise<void>((resolve) => {
      release = resolve;
    });
    const first = gate.run(async () => {
      await blocked;
      return 'first';
    });
    expect(gate.inFlight).toBe(true);
    await expect(gate.run(async () => 'second')).rejects.toThrow('already in flight');
    release();
    expect(await first).toBe('first');
    expect(gate.inFlight).toBe(false);
  });

  it('frees the gate after a failing task', async () => {
    const gate = new WriteGate();
    await expect(gate.run(async () => Promise.reject(new Error('boom')))).rejects.toThrow('boom');
    expect(gate.inFlight).toBe(false);
    expect(await gate.run(async () => 'ok')).toBe('ok');
  });
});

describe('currentDiagnostics', () => {
  it('returns the cache only when it matches the known version', () => {
    const state = emptyState();
    expect(currentDiagnostics(state)).toBeNull();
    state.lastKnownVersion = 3;
    state.diagnosticsCache = { version: 3, diagnostics: [someDiagnostic] };
    expect(currentDiagnostics(state)).toEqual([someDiagnostic]);
    state.lastKnownVersion = 4;
    expect(currentDiagnostics(state)).toBeNull();
  });
});
