// Editor chrome generated from a block definition: palette entries for each
// element kind and attribute forms typed per attribute declaration.
// Descriptions from the block's docs become field help text.

import type {
  AttrValue,
  AttributeInfo,
  BlockDetail,
  ElementKindInfo,
  ModelElementBody
} from './types.js';

export function docFor(block: BlockDetail, element: string, attribute: string | null): string | null {
  for (const entry of block.docs) {
    if (entry.element === element && entry.attribute === attribute) {
      return entry.description;
    }
  }
  return null;
}

export function kindByName(block: BlockDetail, name: string): ElementKindInfo | null {
  for (const kind of block.elements) {
    if (kind.name === name) return kind;
  }
  return null;
}

function option(value: string, label?: string): HTMLOptionElement {
  const el = document.createElement('option');
  el.value = value;
  el.textContent = label ?? value;
  return el;
}

function control(attr: AttributeInfo): HTMLElement {
  const type = attr.type;
  if (type.name === 'enum') {
    const select = document.createElement('select');
    if (!attr.required) select.append(option('', '(none)'));
    for (const value of type.enumValues ?? []) select.append(option(value));
    if (attr.default !== null) select.value = String(attr.default);
    return select;
  }
  if (type.name === 'elementRef') {
    const select = document.createElement('select');
    select.dataset.refKind = type.refKind ?? '';
    select.append(option('', '(none)'));
    return select;
  }
  const input = document.createElement('input');
  if (type.name === 'number' || type.name === 'duration-seconds') {
    input.type = 'number';
    input.step = 'any';
    if (type.name === 'duration-seconds') input.min = '0';
  } else {
    input.type = 'text';
  }
  if (attr.default !== null) input.value = String(attr.default);
  return input;
}

/** One labelled form field for an attribute, with help text and a warning slot. */
export function attributeField(attr: AttributeInfo, help: string | null): HTMLElement {
  const field = document.createElement('div');
  field.className = 'bb-field';

  const label = document.createElement('label');
  label.textContent = attr.required ? `${attr.name} *` : attr.name;
  field.append(label);

  const widget = control(attr);
  widget.classList.add('bb-control');
  widget.dataset.attr = attr.name;
  widget.dataset.valueType = attr.type.name;
  if (attr.required) widget.dataset.required = 'true';

  if (attr.type.name === 'duration-seconds') {
    const row = document.createElement('div');
    row.className = 'bb-control-row';
    const unit = document.createElement('span');
    unit.className = 'bb-unit';
    unit.textContent = 'seconds';
    row.append(widget, unit);
    field.append(row);
  } else {
    field.append(widget);
  }

  if (help) {
    const hint = document.createElement('p');
    hint.className = 'bb-help';
    hint.textContent = help;
    field.append(hint);
  }

  const warning = document.createElement('p');
  warning.className = 'bb-field-warning';
  warning.hidden = true;
  field.append(warning);
  return field;
}

/** Fill every elementRef select with the model's elements of the referenced kind. */
export function populateRefOptions(root: ParentNode, elements: ModelElementBody[]): void {
  for (const select of root.querySelectorAll<HTMLSelectElement>('select[data-ref-kind]')) {
    const refKind = select.dataset.refKind ?? '';
    const keep = select.value;
    while (select.options.length > 1) select.remove(1);
    for (const el of elements) {
      if (el.kind === refKind) select.append(option(el.name));
    }
    select.value = keep;
    if (select.value !== keep) select.value = '';
  }
}

export interface FieldReading {
  attrs: Record<string, AttrValue>;
  missing: string[];
}

/**
 * Read every attribute control under `root`. Empty optional fields are
 * omitted; empty required fields are reported and flagged inline.
 */
export function readAttributeFields(root: ParentNode): FieldReading {
  const attrs: Record<string, AttrValue> = {};
  const missing: string[] = [];
  for (const widget of root.querySelectorAll<HTMLInputElement | HTMLSelectElement>('[data-attr]')) {
    const name = widget.dataset.attr ?? '';
    const raw = widget.value.trim();
    const field = widget.closest('.bb-field');
    const warning = field?.querySelector<HTMLElement>('.bb-field-warning') ?? null;
    if (raw === '') {
      if (widget.dataset.required === 'true') {
        missing.push(name);
        if (warning) {
          warning.textContent = `${name} is required`;
          warning.hidden = false;
        }
      }
      continue;
    }
    if (warning) warning.hidden = true;
    const valueType = widget.dataset.valueType;
    attrs[name] = valueType === 'number' || valueType === 'duration-seconds' ? Number(raw) : raw;
  }
  return { attrs, missing };
}
