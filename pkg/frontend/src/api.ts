// Typed client for the blockbench HTTP service. Every server interaction in
// the UI goes through this class; configuration is the base URL alone.

import type {
  AdvanceOutcome,
  BlockDetail,
  BlockSummary,
  ChangeSetBody,
  ErrorEnvelope,
  ModelBody,
  ModelElementBody,
  PredicateReportBody,
  SessionBody,
  ValidationReport
} from './types.js';

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: unknown;

  constructor(status: number, code: string, message: string, details?: unknown) {
    super(message);
    this.name = 'ApiRequestError';
    this.status = status;
    this.code = code;
    this.details = details;
  }
}

function isEnvelope(value: unknown): value is ErrorEnvelope {
  return (
    typeof value === 'object' &&
    value !== null &&
    typeof (value as ErrorEnvelope).code === 'string' &&
    typeof (value as ErrorEnvelope).message === 'string'
  );
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let envelope: unknown = null;
      try {
        envelope = await response.json();
      } catch {
        // Non-JSON error body; fall through to the generic message.
      }
      if (isEnvelope(envelope)) {
        throw new ApiRequestError(response.status, envelope.code, envelope.message, envelope.details);
      }
      throw new ApiRequestError(response.status, 'unknown', `HTTP ${response.status} for ${path}`);
    }
    return response;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.request(path);
    return (await response.json()) as T;
  }

  private async sendJson<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  listBlocks(): Promise<BlockSummary[]> {
    return this.getJson('/blocks');
  }

  getBlock(name: string): Promise<BlockDetail> {
    return this.getJson(`/blocks/${encodeURIComponent(name)}`);
  }

  async getBlockDocs(name: string): Promise<string> {
    const response = await this.request(`/blocks/${encodeURIComponent(name)}/docs`);
    return response.text();
  }

  async getBlockMethod(name: string): Promise<string> {
    const response = await this.request(`/blocks/${encodeURIComponent(name)}/method`);
    return response.text();
  }

  createModel(block: string, name: string): Promise<ModelBody> {
    return this.sendJson('POST', '/models', { block, name });
  }

  getModel(id: string): Promise<ModelBody> {
    return this.getJson(`/models/${encodeURIComponent(id)}`);
  }

  replaceModel(id: string, baseVersion: number, elements: ModelElementBody[]): Promise<ModelBody> {
    return this.sendJson('PUT', `/models/${encodeURIComponent(id)}`, { baseVersion, elements });
  }

  applyChange(id: string, change: ChangeSetBody): Promise<ModelBody> {
    return this.sendJson('PATCH', `/models/${encodeURIComponent(id)}`, change);
  }

  validateModel(id: string): Promise<ValidationReport> {
    return this.sendJson('POST', `/models/${encodeURIComponent(id)}/validate`);
  }

  async fetchRender(id: string): Promise<string> {
    const response = await this.request(`/models/${encodeURIComponent(id)}/render.svg`);
    return response.text();
  }

  startSession(modelId: string): Promise<SessionBody> {
    return this.sendJson('POST', `/models/${encodeURIComponent(modelId)}/session`);
  }

  getSession(id: string): Promise<SessionBody> {
    return this.getJson(`/sessions/${encodeURIComponent(id)}`);
  }

  async advanceSession(id: string, confirm = false): Promise<AdvanceOutcome> {
    const payload = await this.sendJson<Record<string, unknown>>(
      'POST',
      `/sessions/${encodeURIComponent(id)}/advance`,
      { confirm }
    );
    // A moved session carries stepStates; an unmet step comes back as a
    // predicate report instead.
    if (Array.isArray(payload.stepStates)) {
      return { kind: 'session', session: payload as unknown as SessionBody };
    }
    return { kind: 'report', report: payload as unknown as PredicateReportBody };
  }
}
