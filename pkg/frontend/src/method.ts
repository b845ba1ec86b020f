// Method sidebar: the block's step sequence next to the canvas. The current
// step is highlighted, the advance button posts to the session, and an unmet
// step's predicate report is shown as a hint instead of moving on.

import { ApiClient, ApiRequestError } from './api.js';
import type { PredicateReportBody, SessionBody, StepInfo } from './types.js';

interface MethodSidebarOptions {
  client: ApiClient;
  root: HTMLElement;
  /** Serializes the advance POST with the editor's other writes. */
  runWrite: <T>(task: () => Promise<T>) => Promise<T>;
  onError: (error: unknown) => void;
  onSessionChange?: (sessionId: string | null) => void;
}

const STATUS_GLYPHS: Record<string, string> = { done: '✓', current: '▶', pending: '○' };

export class MethodSidebar {
  private readonly client: ApiClient;
  private readonly root: HTMLElement;
  private readonly runWrite: <T>(task: () => Promise<T>) => Promise<T>;
  private readonly onError: (error: unknown) => void;

  private readonly onSessionChange: (sessionId: string | null) => void;

  private modelId: string | null = null;
  private steps: StepInfo[] = [];
  session: SessionBody | null = null;
  private report: PredicateReportBody | null = null;

  constructor(options: MethodSidebarOptions) {
    this.client = options.client;
    this.root = options.root;
    this.runWrite = options.runWrite;
    this.onError = options.onError;
    this.onSessionChange = options.onSessionChange ?? (() => undefined);
    this.root.addEventListener('click', (event) => {
      const target = event.target as HTMLElement;
      if (target.id === 'bb-session-start') void this.start();
      if (target.id === 'bb-advance') void this.advance();
    });
  }

  bind(modelId: string, steps: StepInfo[]): void {
    this.modelId = modelId;
    this.steps = steps;
    this.session = null;
    this.report = null;
    this.onSessionChange(null);
    this.render();
  }

  get finished(): boolean {
    return this.session !== null && this.session.status.done === this.session.status.total;
  }

  async start(): Promise<void> {
    if (this.modelId === null) return;
    try {
      this.session = await this.runWrite(() => this.client.startSession(this.modelId!));
      this.report = null;
      this.onSessionChange(this.session.id);
      this.render();
    } catch (error) {
      this.onError(error);
    }
  }

  async advance(): Promise<void> {
    if (this.session === null || this.finished) return;
    try {
      // Clicking the button is the explicit confirmation a manual step asks for.
      const outcome = await this.runWrite(() => this.client.advanceSession(this.session!.id, true));
      if (outcome.kind === 'session') {
        this.session = outcome.session;
        this.report = null;
      } else {
        this.report = outcome.report;
      }
      this.render();
    } catch (error) {
      if (error instanceof ApiRequestError && error.code === 'session-finished') {
        this.render();
        return;
      }
      this.onError(error);
    }
  }

  render(): void {
    this.root.textContent = '';
    const heading = document.createElement('h2');
    heading.textContent = 'Method';
    this.root.append(heading);

    if (this.modelId === null) {
      const note = document.createElement('p');
      note.className = 'bb-muted';
      note.textContent = 'Open a model to follow its method.';
      this.root.append(note);
      return;
    }

    if (this.session === null) {
      const start = document.createElement('button');
      start.id = 'bb-session-start';
      start.textContent = 'Start session';
      this.root.append(start);
      return;
    }

    const statusByStep = new Map(this.session.stepStates.map((s) => [s.stepId, s.status]));
    const list = document.createElement('ol');
    list.id = 'bb-steps';
    for (const step of this.steps) {
      const status = statusByStep.get(step.id) ?? 'pending';
      const item = document.createElement('li');
      item.className = `bb-step bb-step-${status}`;
      item.dataset.stepId = step.id;
      item.dataset.status = status;
      const title = document.createElement('span');
      title.textContent = `${STATUS_GLYPHS[status] ?? ''} ${step.title}`;
      item.append(title);
      if (status === 'current' && step.description) {
        const desc = document.createElement('p');
        desc.className = 'bb-muted';
        desc.textContent = step.description;
        item.append(desc);
      }
      list.append(item);
    }
    this.root.append(list);

    const hint = document.createElement('div');
    hint.id = 'bb-step-hint';
    if (this.report !== null) {
      const detail = document.createElement('p');
      detail.className = 'bb-hint-detail';
      detail.textContent = `Not yet: ${this.report.detail}`;
      hint.append(detail);
      if (this.report.diagnostics.length > 0) {
        const problems = document.createElement('ul');
        problems.className = 'bb-hint-problems';
        for (const diag of this.report.diagnostics) {
          const li = document.createElement('li');
          li.textContent = `${diag.severity} ${diag.code}: ${diag.message}`;
          problems.append(li);
        }
        hint.append(problems);
      }
    }
    this.root.append(hint);

    if (this.finished) {
      const complete = document.createElement('div');
      complete.id = 'bb-method-complete';
      complete.className = 'bb-complete';
      complete.textContent = `All ${this.session.status.total} steps complete.`;
      this.root.append(complete);
    } else {
      const guidance = document.createElement('p');
      guidance.className = 'bb-muted bb-guidance';
      guidance.textContent = this.session.status.guidance;
      this.root.append(guidance);
    }

    const advanceButton = document.createElement('button');
    advanceButton.id = 'bb-advance';
    advanceButton.textContent = 'Advance';
    advanceButton.disabled = this.finished;
    this.root.append(advanceButton);
  }
}
