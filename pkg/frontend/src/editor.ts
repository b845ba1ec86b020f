// The single-page editor. One model is open at a time; every committed edit
// goes to the server as a change set, and the preview plus diagnostics are
// re-requested afterwards so the page never shows state the server did not
// produce. The SVG itself is rendered server-side; this file only adds
// selection handling on top of it.

import { ApiClient, ApiRequestError } from './api.js';
import {
  attributeField,
  docFor,
  kindByName,
  populateRefOptions,
  readAttributeFields
} from './forms.js';
import { EditorState, WriteGate, currentDiagnostics, emptyState } from './state.js';
import type {
  AttrValue,
  BlockDetail,
  ChangeOpBody,
  Diagnostic,
  ElementKindInfo,
  ModelElementBody
} from './types.js';
import { MethodSidebar } from './method.js';

const SHELL_HTML = `
  <header class="bb-topbar">
    <h1>blockbench</h1>
    <select id="bb-block-picker" aria-label="building block"></select>
    <input id="bb-model-id" placeholder="model id" aria-label="model id">
    <button id="bb-open">Open</button>
    <span id="bb-version" class="bb-version"></span>
  </header>
  <div id="bb-banners"></div>
  <main class="bb-grid">
    <aside class="bb-side">
      <section class="bb-panel">
        <h2>Palette</h2>
        <ul id="bb-palette"></ul>
      </section>
      <section class="bb-panel">
        <h2>Elements</h2>
        <ul id="bb-elements"></ul>
      </section>
      <section class="bb-panel">
        <h2 id="bb-form-title">Add element</h2>
        <form id="bb-form"></form>
      </section>
    </aside>
    <section class="bb-main">
      <section class="bb-panel">
        <h2>Preview</h2>
        <div id="bb-preview"></div>
      </section>
      <section class="bb-panel">
        <h2>Diagnostics</h2>
        <ul id="bb-diagnostics"></ul>
      </section>
    </section>
    <aside class="bb-side" id="bb-method"></aside>
  </main>
`;

type BannerKind = 'conflict' | 'error' | 'notice';

export class Editor {
  readonly client: ApiClient;
  readonly state: EditorState;
  readonly gate: WriteGate;

  private readonly root: HTMLElement;
  private block: BlockDetail | null = null;
  private formKind: ElementKindInfo | null = null;
  private formMode: 'add' | 'edit' = 'add';
  method!: MethodSidebar;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    this.state = emptyState();
    this.gate = new WriteGate();
  }

  // ----- chrome -----------------------------------------------------------

  async mount(): Promise<void> {
    this.root.innerHTML = SHELL_HTML;
    this.method = new MethodSidebar({
      client: this.client,
      root: this.byId('bb-method'),
      runWrite: (task) => this.gate.run(task),
      onError: (error) => this.showError(error),
      onSessionChange: (sessionId) => {
        this.state.sessionId = sessionId;
      }
    });
    this.method.render();

    this.byId('bb-open').addEventListener('click', () => void this.openFromTopbar());
    this.byId('bb-palette').addEventListener('click', (event) => {
      const entry = (event.target as HTMLElement).closest<HTMLElement>('[data-kind]');
      if (entry) this.openAddForm(entry.dataset.kind ?? '');
    });
    this.byId('bb-elements').addEventListener('click', (event) => {
      const entry = (event.target as HTMLElement).closest<HTMLElement>('[data-name]');
      if (entry) this.select(entry.dataset.kind ?? '', entry.dataset.name ?? '');
    });
    this.byId('bb-preview').addEventListener('click', (event) => {
      const shape = (event.target as Element).closest?.('[data-name]');
      if (!shape) return;
      const name = shape.getAttribute('data-name') ?? '';
      const element = this.state.model?.elements.find((el) => el.name === name);
      if (element) this.select(element.kind, element.name);
    });
    this.byId('bb-form').addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submitForm();
    });

    try {
      const blocks = await this.client.listBlocks();
      const picker = this.byId<HTMLSelectElement>('bb-block-picker');
      for (const summary of blocks) {
        const option = document.createElement('option');
        option.value = summary.name;
        option.textContent = summary.name;
        picker.append(option);
      }
    } catch (error) {
      this.showError(error);
    }
  }

  private byId<T extends HTMLElement = HTMLElement>(id: string): T {
    const el = this.root.querySelector<T>(`#${id}`);
    if (!el) throw new Error(`missing editor element #${id}`);
    return el;
  }

  showBanner(kind: BannerKind, message: string): void {
    const banner = document.createElement('div');
    banner.className = `bb-banner bb-banner-${kind}`;
    banner.dataset.banner = kind;
    const text = document.createElement('span');
    text.textContent = message;
    const dismiss = document.createElement('button');
    dismiss.textContent = 'Dismiss';
    dismiss.addEventListener('click', () => banner.remove());
    banner.append(text, dismiss);
    this.byId('bb-banners').append(banner);
  }

  private showError(error: unknown): void {
    if (error instanceof ApiRequestError) {
      this.showBanner('error', `${error.code}: ${error.message}`);
    } else {
      this.showBanner('error', String(error));
    }
  }

  // ----- opening models ---------------------------------------------------

  private async openFromTopbar(): Promise<void> {
    const blockName = this.byId<HTMLSelectElement>('bb-block-picker').value;
    const modelId = this.byId<HTMLInputElement>('bb-model-id').value.trim();
    if (!modelId) {
      this.showBanner('notice', 'Enter a model id to open.');
      return;
    }
    try {
      await this.open(blockName, modelId);
    } catch (error) {
      this.showError(error);
    }
  }

  /** Open an existing model, creating it from the block when it is new. */
  async open(blockName: string, modelId: string): Promise<void> {
    let model;
    try {
      model = await this.client.getModel(modelId);
    } catch (error) {
      if (error instanceof ApiRequestError && error.code === 'unknown-model') {
        model = await this.gate.run(() => this.client.createModel(blockName, modelId));
      } else {
        throw error;
      }
    }
    this.state.modelId = model.id;
    this.state.model = model;
    this.state.lastKnownVersion = model.version;
    this.state.selection = null;
    this.state.diagnosticsCache = null;
    this.block = await this.client.getBlock(model.blockName);
    this.method.bind(model.id, this.block.method.steps);
    this.renderPalette();
    this.openAddForm(null);
    await this.refresh();
  }

  // ----- server round trips -----------------------------------------------

  /**
   * Commit one change set. Success and conflict both end with the preview
   * and diagnostics re-requested for the version the server now holds.
   */
  async commit(ops: ChangeOpBody[]): Promise<boolean> {
    if (this.state.modelId === null) return false;
    const modelId = this.state.modelId;
    try {
      return await this.gate.run(async () => {
        this.state.pendingChangeSet = { baseVersion: this.state.lastKnownVersion, ops };
        try {
          const model = await this.client.applyChange(modelId, this.state.pendingChangeSet);
          this.state.model = model;
          this.state.lastKnownVersion = model.version;
          return true;
        } finally {
          this.state.pendingChangeSet = null;
        }
      });
    } catch (error) {
      if (error instanceof ApiRequestError && error.code === 'version-conflict') {
        const details = error.details as { currentVersion?: number } | undefined;
        await this.reloadLatest();
        this.showBanner(
          'conflict',
          `The model changed elsewhere (now version ${details?.currentVersion ?? this.state.lastKnownVersion}). ` +
            'Your edit was not applied; review the refreshed model and retry.'
        );
      } else if (error instanceof ApiRequestError && error.code === 'change-invalid') {
        const details = error.details as { problems?: string[] } | undefined;
        this.showBanner('error', `Change rejected: ${(details?.problems ?? [error.message]).join('; ')}`);
      } else {
        this.showError(error);
      }
      return false;
    } finally {
      await this.refresh();
    }
  }

  private async reloadLatest(): Promise<void> {
    if (this.state.modelId === null) return;
    const model = await this.client.getModel(this.state.modelId);
    this.state.model = model;
    this.state.lastKnownVersion = model.version;
  }

  /** Re-request the server-rendered preview and diagnostics for the open model. */
  async refresh(): Promise<void> {
    if (this.state.modelId === null) return;
    const modelId = this.state.modelId;
    const version = this.state.lastKnownVersion;
    const preview = this.byId('bb-preview');
    try {
      const [svg, report] = await Promise.all([
        this.client.fetchRender(modelId),
        this.client.validateModel(modelId)
      ]);
      preview.innerHTML = svg;
      this.state.diagnosticsCache = { version: report.version, diagnostics: report.diagnostics };
    } catch (error) {
      if (error instanceof ApiRequestError && error.code === 'binding-failed') {
        preview.textContent = `Cannot render: ${error.message}`;
        this.state.diagnosticsCache = { version, diagnostics: [] };
      } else {
        this.showError(error);
        return;
      }
    }
    this.renderDiagnostics();
    this.renderElements();
    this.applySelectionOverlay();
    populateRefOptions(this.byId('bb-form'), this.state.model?.elements ?? []);
    this.byId('bb-version').textContent = `v${this.state.lastKnownVersion}`;
  }

  // ----- panels ------------------------------------------------------------

  private renderPalette(): void {
    const palette = this.byId('bb-palette');
    palette.textContent = '';
    if (!this.block) return;
    for (const kind of this.block.elements) {
      const item = document.createElement('li');
      item.className = 'bb-palette-entry';
      item.dataset.kind = kind.name;
      const label = document.createElement('span');
      label.textContent = kind.name;
      const role = document.createElement('span');
      role.className = 'bb-role';
      role.textContent = kind.role;
      item.append(label, role);
      const help = docFor(this.block, kind.name, null);
      if (help) item.title = help;
      palette.append(item);
    }
  }

  private renderElements(): void {
    const list = this.byId('bb-elements');
    list.textContent = '';
    for (const el of this.state.model?.elements ?? []) {
      const item = document.createElement('li');
      item.className = 'bb-element-entry';
      item.dataset.kind = el.kind;
      item.dataset.name = el.name;
      if (
        this.state.selection &&
        this.state.selection.kind === el.kind &&
        this.state.selection.name === el.name
      ) {
        item.classList.add('bb-selected');
      }
      item.textContent = `[${el.kind}: ${el.name}]`;
      list.append(item);
    }
  }

  private renderDiagnostics(): void {
    const list = this.byId('bb-diagnostics');
    list.textContent = '';
    const diagnostics = currentDiagnostics(this.state);
    if (diagnostics === null) return;
    if (diagnostics.length === 0) {
      const item = document.createElement('li');
      item.className = 'bb-muted';
      item.textContent = 'No diagnostics.';
      list.append(item);
      return;
    }
    for (const diag of diagnostics) {
      list.append(this.diagnosticItem(diag));
    }
  }

  private diagnosticItem(diag: Diagnostic): HTMLLIElement {
    const item = document.createElement('li');
    item.className = `bb-diagnostic bb-severity-${diag.severity}`;
    item.dataset.code = diag.code;
    const badge = document.createElement('span');
    badge.className = 'bb-badge';
    badge.textContent = `${diag.severity} ${diag.code}`;
    const message = document.createElement('span');
    message.textContent = diag.targets.length > 0 ? `[${diag.targets.join(', ')}] ${diag.message}` : diag.message;
    item.append(badge, message);
    item.title = diag.explanation;
    if (diag.targets.length > 0) {
      item.classList.add('bb-clickable');
      item.addEventListener('click', () => {
        const name = diag.targets[0];
        const element = this.state.model?.elements.find((el) => el.name === name);
        if (element) this.select(element.kind, element.name);
      });
    }
    return item;
  }

  private applySelectionOverlay(): void {
    const preview = this.byId('bb-preview');
    // Class attribute surgery instead of classList: the shapes are SVG nodes.
    for (const marked of preview.querySelectorAll('.bb-selected')) {
      const classes = (marked.getAttribute('class') ?? '').split(/\s+/).filter((c) => c && c !== 'bb-selected');
      marked.setAttribute('class', classes.join(' '));
    }
    const selection = this.state.selection;
    if (!selection) return;
    const shape = preview.querySelector(`[data-name="${selection.name}"]`);
    if (shape) {
      const classes = (shape.getAttribute('class') ?? '').split(/\s+/).filter(Boolean);
      classes.push('bb-selected');
      shape.setAttribute('class', classes.join(' '));
    }
  }

  // ----- selection and forms ------------------------------------------------

  select(kindName: string, name: string): void {
    this.state.selection = { kind: kindName, name };
    this.renderElements();
    this.applySelectionOverlay();
    this.openEditForm();
  }

  openAddForm(kindName: string | null): void {
    if (!this.block) return;
    this.formMode = 'add';
    this.state.selection = null;
    this.renderElements();
    this.applySelectionOverlay();
    const form = this.byId<HTMLFormElement>('bb-form');
    form.textContent = '';
    if (kindName === null) {
      this.byId('bb-form-title').textContent = 'Add element';
      const note = document.createElement('p');
      note.className = 'bb-muted';
      note.textContent = 'Pick a kind from the palette.';
      form.append(note);
      this.formKind = null;
      return;
    }
    const kind = kindByName(this.block, kindName);
    if (!kind) return;
    this.formKind = kind;
    this.byId('bb-form-title').textContent = `Add ${kind.name}`;

    form.append(this.nameField(''));
    if (kind.role === 'edge') {
      form.append(this.endpointField('source', kind.sourceKind ?? ''));
      form.append(this.endpointField('target', kind.targetKind ?? ''));
    }
    for (const attr of kind.attributes) {
      form.append(attributeField(attr, docFor(this.block, kind.name, attr.name)));
    }
    populateRefOptions(form, this.state.model?.elements ?? []);

    const submit = document.createElement('button');
    submit.type = 'submit';
    submit.id = 'bb-form-submit';
    submit.textContent = `Add ${kind.name}`;
    form.append(submit);
  }

  openEditForm(): void {
    if (!this.block || !this.state.selection) return;
    const element = this.findSelected();
    const kind = kindByName(this.block, this.state.selection.kind);
    if (!element || !kind) return;
    this.formMode = 'edit';
    this.formKind = kind;
    this.byId('bb-form-title').textContent = `[${element.kind}: ${element.name}]`;
    const form = this.byId<HTMLFormElement>('bb-form');
    form.textContent = '';

    if (kind.role === 'edge') {
      const endpoints = document.createElement('p');
      endpoints.className = 'bb-muted';
      endpoints.textContent = `${element.attrs.source ?? '?'} -> ${element.attrs.target ?? '?'}`;
      form.append(endpoints);
    }
    for (const attr of kind.attributes) {
      const field = attributeField(attr, docFor(this.block, kind.name, attr.name));
      const widget = field.querySelector<HTMLInputElement | HTMLSelectElement>('[data-attr]');
      if (widget && attr.name in element.attrs) {
        widget.value = String(element.attrs[attr.name]);
      } else if (widget && !(attr.name in element.attrs)) {
        widget.value = '';
      }
      form.append(field);
    }
    populateRefOptions(form, this.state.model?.elements ?? []);
    for (const attr of kind.attributes) {
      const widget = form.querySelector<HTMLSelectElement>(`select[data-attr="${attr.name}"][data-ref-kind]`);
      if (widget && attr.name in element.attrs) widget.value = String(element.attrs[attr.name]);
    }

    const submit = document.createElement('button');
    submit.type = 'submit';
    submit.id = 'bb-form-submit';
    submit.textContent = 'Save';
    const remove = document.createElement('button');
    remove.type = 'button';
    remove.id = 'bb-form-delete';
    remove.textContent = 'Delete';
    remove.addEventListener('click', () => void this.deleteSelected());
    form.append(submit, remove);
  }

  private nameField(value: string): HTMLElement {
    const field = document.createElement('div');
    field.className = 'bb-field';
    const label = document.createElement('label');
    label.textContent = 'name *';
    const input = document.createElement('input');
    input.type = 'text';
    input.dataset.role = 'name';
    input.value = value;
    const warning = document.createElement('p');
    warning.className = 'bb-field-warning';
    warning.hidden = true;
    field.append(label, input, warning);
    return field;
  }

  private endpointField(role: 'source' | 'target', endpointKind: string): HTMLElement {
    const field = document.createElement('div');
    field.className = 'bb-field';
    const label = document.createElement('label');
    label.textContent = `${role} *`;
    const select = document.createElement('select');
    select.dataset.role = role;
    for (const el of this.state.model?.elements ?? []) {
      if (el.kind === endpointKind) {
        const option = document.createElement('option');
        option.value = el.name;
        option.textContent = el.name;
        select.append(option);
      }
    }
    const warning = document.createElement('p');
    warning.className = 'bb-field-warning';
    warning.hidden = true;
    field.append(label, select, warning);
    return field;
  }

  private findSelected(): ModelElementBody | null {
    const selection = this.state.selection;
    if (!selection || !this.state.model) return null;
    return (
      this.state.model.elements.find(
        (el) => el.kind === selection.kind && el.name === selection.name
      ) ?? null
    );
  }

  // ----- committing edits ----------------------------------------------------

  private async submitForm(): Promise<void> {
    if (!this.formKind) return;
    const form = this.byId<HTMLFormElement>('bb-form');
    const submit = form.querySelector<HTMLButtonElement>('#bb-form-submit');
    if (submit) submit.disabled = true;
    try {
      if (this.formMode === 'add') {
        await this.submitAdd(form, this.formKind);
      } else {
        await this.submitEdit(form, this.formKind);
      }
    } finally {
      if (submit) submit.disabled = false;
    }
  }

  private fieldWarning(widget: HTMLElement, message: string): void {
    const warning = widget.closest('.bb-field')?.querySelector<HTMLElement>('.bb-field-warning');
    if (warning) {
      warning.textContent = message;
      warning.hidden = false;
    }
  }

  private async submitAdd(form: HTMLFormElement, kind: ElementKindInfo): Promise<void> {
    const nameInput = form.querySelector<HTMLInputElement>('[data-role="name"]');
    const name = nameInput?.value.trim() ?? '';
    const reading = readAttributeFields(form);
    let blocked = reading.missing.length > 0;
    if (name === '' && nameInput) {
      this.fieldWarning(nameInput, 'name is required');
      blocked = true;
    }
    if (blocked) return;

    let op: ChangeOpBody;
    if (kind.role === 'edge') {
      const source = form.querySelector<HTMLSelectElement>('[data-role="source"]')?.value ?? '';
      const target = form.querySelector<HTMLSelectElement>('[data-role="target"]')?.value ?? '';
      op = { op: 'add-edge', kind: kind.name, name, attrs: reading.attrs, source, target };
    } else {
      op = { op: 'add-element', kind: kind.name, name, attrs: reading.attrs };
    }
    if (await this.commit([op])) {
      this.openAddForm(kind.name);
    }
  }

  private async submitEdit(form: HTMLFormElement, kind: ElementKindInfo): Promise<void> {
    const element = this.findSelected();
    if (!element) return;
    const reading = readAttributeFields(form);
    if (reading.missing.length > 0) return;

    const ops: ChangeOpBody[] = [];
    for (const attr of kind.attributes) {
      const before = attr.name in element.attrs ? element.attrs[attr.name] : null;
      const after = attr.name in reading.attrs ? (reading.attrs[attr.name] as AttrValue) : null;
      if (before === after) continue;
      ops.push({ op: 'set-attr', kind: kind.name, name: element.name, attr: attr.name, value: after });
    }
    if (ops.length === 0) {
      this.showBanner('notice', 'Nothing to save.');
      return;
    }
    if (await this.commit(ops)) {
      this.openEditForm();
    }
  }

  private async deleteSelected(): Promise<void> {
    const element = this.findSelected();
    const kind = this.formKind;
    if (!element || !kind) return;
    const op: ChangeOpBody = {
      op: kind.role === 'edge' ? 'remove-edge' : 'remove-element',
      kind: element.kind,
      name: element.name
    };
    if (await this.commit([op])) {
      this.openAddForm(null);
    }
  }
}

export async function mountEditor(root: HTMLElement, client: ApiClient): Promise<Editor> {
  const editor = new Editor(root, client);
  await editor.mount();
  return editor;
}
