// Client behaviour against the live service: response shapes, the error
// envelope, optimistic concurrency, and session outcomes.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ApiClient, ApiRequestError } from '../src/api.js';
import { startService, uniqueId, type LiveService } from './service.js';

let service: LiveService;
let client: ApiClient;

beforeAll(async () => {
  service = await startService();
  client = new ApiClient(service.baseUrl);
});

afterAll(async () => {
  await service.stop();
});

describe('blocks', () => {
  it('lists the workspace blocks', async () => {
    const blocks = await client.listBlocks();
    const names = blocks.map((b) => b.name);
    expect(names).toContain('StateMachine');
    expect(names).toContain('TrafficSignal');
  });

  it('details element kinds with typed attributes', async () => {
    const block = await client.getBlock('StateMachine');
    const state = block.elements.find((el) => el.name === 'State')!;
    const type = state.attributes.find((a) => a.name === 'type')!;
    expect(type.type.name).toBe('enum');
    expect(type.type.enumValues).toEqual(['Initial', 'Intermediate', 'Final']);
    expect(type.required).toBe(true);
    expect(type.default).toBe('Intermediate');
    const transition = block.elements.find((el) => el.name === 'Transition')!;
    expect(transition.role).toBe('edge');
    expect(transition.sourceKind).toBe('State');
  });

  it('serves markdown docs and method guides', async () => {
    const docs = await client.getBlockDocs('StateMachine');
    expect(docs).toContain('# StateMachine syntax documentation');
    const method = await client.getBlockMethod('StateMachine');
    expect(method).toContain('1.');
  });

  it('reports unknown blocks through the error envelope', async () => {
    const error = await client.getBlock('NoSuchBlock').catch((e) => e);
    expect(error).toBeInstanceOf(ApiRequestError);
    expect(error.status).toBe(404);
    expect(error.code).toBe('unknown-block');
  });
});

describe('models', () => {
  it('creates a model with its seeded element', async () => {
    const model = await client.createModel('StateMachine', uniqueId('fresh'));
    expect(model.version).toBe(1);
    expect(model.elements).toEqual([
      { name: 'Start', kind: 'State', attrs: { type: 'Initial' } }
    ]);
  });

  it('refuses a duplicate id', async () => {
    const id = uniqueId('dup');
    await client.createModel('StateMachine', id);
    const error = await client.createModel('StateMachine', id).catch((e) => e);
    expect(error.status).toBe(409);
    expect(error.code).toBe('model-exists');
  });

  it('applies a change set and bumps the version', async () => {
    const id = uniqueId('patch');
    await client.createModel('StateMachine', id);
    const updated = await client.applyChange(id, {
      baseVersion: 1,
      ops: [{ op: 'add-element', kind: 'State', name: 'work', attrs: {} }]
    });
    expect(updated.version).toBe(2);
    const names = updated.elements.map((el) => el.name);
    expect(names).toContain('work');
  });

  it('rejects a stale change with the current version in details', async () => {
    const id = uniqueId('stale');
    await client.createModel('StateMachine', id);
    await client.applyChange(id, {
      baseVersion: 1,
      ops: [{ op: 'add-element', kind: 'State', name: 'a', attrs: {} }]
    });
    const error = await client
      .applyChange(id, {
        baseVersion: 1,
        ops: [{ op: 'add-element', kind: 'State', name: 'b', attrs: {} }]
      })
      .catch((e) => e);
    expect(error).toBeInstanceOf(ApiRequestError);
    expect(error.status).toBe(409);
    expect(error.code).toBe('version-conflict');
    expect((error.details as { currentVersion: number }).currentVersion).toBe(2);
  });

  it('rejects an invalid change with the problem list', async () => {
    const id = uniqueId('badop');
    await client.createModel('StateMachine', id);
    const error = await client
      .applyChange(id, {
        baseVersion: 1,
        ops: [{ op: 'add-element', kind: 'Ghost', name: 'x', attrs: {} }]
      })
      .catch((e) => e);
    expect(error.status).toBe(422);
    expect(error.code).toBe('change-invalid');
    const details = error.details as { problems: string[] };
    expect(details.problems.length).toBeGreaterThan(0);
    const after = await client.getModel(id);
    expect(after.version).toBe(1);
  });
});

describe('validation and rendering', () => {
  it('returns diagnostics with explanations and the text report', async () => {
    const id = uniqueId('diag');
    await client.createModel('StateMachine', id);
    await client.applyChange(id, {
      baseVersion: 1,
      ops: [{ op: 'add-element', kind: 'State', name: 'lonely', attrs: {} }]
    });
    const report = await client.validateModel(id);
    expect(report.version).toBe(2);
    // With no transitions at all, both states are isolated.
    const isolated = report.diagnostics.filter((d) => d.code === 'N5');
    expect(isolated.map((d) => d.targets)).toEqual([['Start'], ['lonely']]);
    expect(isolated[0].severity).toBe('warning');
    expect(isolated[0].explanation).toContain('Reason:');
    expect(report.text).toContain('warning N5 [lonely]');
  });

  it('serves the rendered SVG', async () => {
    const id = uniqueId('svg');
    await client.createModel('StateMachine', id);
    const svg = await client.fetchRender(id);
    expect(svg.startsWith('<svg ')).toBe(true);
    expect(svg).toContain('data-name="Start"');
  });
});

describe('sessions', () => {
  it('starts with the first step current', async () => {
    const id = uniqueId('sess');
    await client.createModel('StateMachine', id);
    const session = await client.startSession(id);
    expect(session.stepStates[0]).toEqual({ stepId: 's1', status: 'current' });
    expect(session.status.done).toBe(0);
  });

  it('advances a met step and reports an unmet one', async () => {
    const id = uniqueId('adv');
    await client.createModel('StateMachine', id);
    const session = await client.startSession(id);

    const moved = await client.advanceSession(session.id);
    expect(moved.kind).toBe('session');
    if (moved.kind === 'session') {
      expect(moved.session.status.currentStepId).toBe('s2');
    }

    const blocked = await client.advanceSession(session.id);
    expect(blocked.kind).toBe('report');
    if (blocked.kind === 'report') {
      expect(blocked.report.satisfied).toBe(false);
      expect(blocked.report.stepId).toBe('s2');
      expect(blocked.report.detail).toContain('found 1');
    }
  });

  it('surfaces unknown sessions through the envelope', async () => {
    const error = await client.getSession('no-such-session').catch((e) => e);
    expect(error.status).toBe(404);
    expect(error.code).toBe('unknown-session');
  });
});
