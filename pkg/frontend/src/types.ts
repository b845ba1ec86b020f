// JSON shapes exchanged with the blockbench HTTP service. Field names are
// the service's camelCase mirrors of its domain types; nothing here is
// computed client-side.

export type AttrValue = string | number;

export type ValueTypeName = 'text' | 'number' | 'duration-seconds' | 'enum' | 'elementRef';

export interface ValueTypeInfo {
  name: ValueTypeName;
  enumValues?: string[];
  refKind?: string;
}

export interface AttributeInfo {
  name: string;
  type: ValueTypeInfo;
  required: boolean;
  default: AttrValue | null;
}

export type ElementRole = 'node' | 'edge' | 'datum';

export interface ElementKindInfo {
  name: string;
  role: ElementRole;
  sourceKind?: string;
  targetKind?: string;
  attributes: AttributeInfo[];
}

export interface ConstraintInfo {
  id: string;
  kind: string;
  params: Record<string, string>;
  severity: Severity;
  message: string;
}

export interface PredicateInfo {
  kind: string;
  params: Record<string, string>;
}

export interface StepInfo {
  id: string;
  title: string;
  description: string;
  completion: PredicateInfo;
}

export interface NuanceInfo {
  id: string;
  effect: string;
  params: Record<string, string>;
  reason: string;
}

export interface DocEntry {
  element: string;
  attribute: string | null;
  description: string;
}

export interface BlockSummary {
  name: string;
  parent: string | null;
  elements: number;
  constraints: number;
  nuances: number;
  steps: number;
}

export interface BlockDetail {
  name: string;
  lineage: string[];
  elements: ElementKindInfo[];
  constraints: ConstraintInfo[];
  method: { steps: StepInfo[] };
  nuances: NuanceInfo[];
  docs: DocEntry[];
}

export interface ModelElementBody {
  name: string;
  kind: string;
  attrs: Record<string, AttrValue>;
}

export interface ModelBody {
  id: string;
  blockName: string;
  version: number;
  elements: ModelElementBody[];
}

export type Severity = 'error' | 'warning' | 'info';

export interface Diagnostic {
  code: string;
  severity: Severity;
  targets: string[];
  message: string;
  nuanceMarker: string | null;
  explanation: string;
}

export interface ValidationReport {
  modelId: string;
  version: number;
  diagnostics: Diagnostic[];
  text: string;
}

export type ChangeOpName = 'add-element' | 'add-edge' | 'set-attr' | 'remove-element' | 'remove-edge';

export interface ChangeOpBody {
  op: ChangeOpName;
  kind: string;
  name: string;
  attrs?: Record<string, AttrValue>;
  attr?: string;
  value?: AttrValue | null;
  source?: string;
  target?: string;
}

export interface ChangeSetBody {
  baseVersion: number;
  ops: ChangeOpBody[];
}

export type StepStatus = 'done' | 'current' | 'pending';

export interface StepStateBody {
  stepId: string;
  status: StepStatus;
}

export interface SessionStatusBody {
  done: number;
  total: number;
  currentStepId: string | null;
  currentTitle: string | null;
  guidance: string;
}

export interface SessionBody {
  id: string;
  modelId: string;
  blockName: string;
  stepStates: StepStateBody[];
  startedAt: number;
  updatedAt: number;
  status: SessionStatusBody;
}

export interface PredicateReportBody {
  sessionId: string;
  stepId: string;
  predicate: PredicateInfo;
  satisfied: boolean;
  detail: string;
  diagnostics: Diagnostic[];
}

/** Advancing either moves the session or explains why the step is unmet. */
export type AdvanceOutcome =
  | { kind: 'session'; session: SessionBody }
  | { kind: 'report'; report: PredicateReportBody };

export interface ErrorEnvelope {
  status: number;
  code: string;
  message: string;
  details?: unknown;
}
