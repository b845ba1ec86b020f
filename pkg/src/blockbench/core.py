"""Shared domain types and static definition checking.

A building block bundles a small graphical language: element kinds with typed
attributes, constraints drawn from a fixed catalog, an ordered method of
modelling steps, visual nuances, and structured documentation entries. Blocks
may extend a parent block; entries with the same id override the parent's.

Models are instance graphs of typed elements conforming to a block. They live
here too because nearly every other module consumes them.

All values in this module are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

# Element roles
NODE = "node"
EDGE = "edge"
DATUM = "datum"
ROLES = (NODE, EDGE, DATUM)

# Diagnostic severities, ordered weakest to strongest.
WARNING = "warning"
ERROR = "error"
SEVERITIES = (WARNING, ERROR)

CONSTRAINT_KINDS = (
    "reachability",
    "no-parallel-edges",
    "degree-bound",
    "edge-attribute-required",
    "duration-well-formed",
    "forbid-element-value",
    "no-isolated-nodes",
)

NUANCE_EFFECTS = (
    "auto-create",
    "shape",
    "fill",
    "badge",
    "violation-marker",
    "edge-style",
    "icon-slot",
    "layout-order",
)

PREDICATE_KINDS = (
    "element-count-at-least",
    "all-of-kind-have-attribute",
    "model-valid",
    "manual-confirm",
)

SHAPES = ("circle", "oval", "rect")
CORNERS = ("top-left", "top-right", "bottom-left", "bottom-right")

# Attribute names every element carries implicitly: the element name itself,
# plus the structural endpoints on edge kinds. Doc entries and selectors may
# reference them without an explicit AttributeSpec.
IMPLICIT_ATTRS = ("name",)
IMPLICIT_EDGE_ATTRS = ("name", "source", "target")

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
NAME_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*\Z")  # model element names may be numeric

AttrValue = str | int | float


class BlockbenchError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Block definition types


@dataclass(frozen=True)
class ValueType:
    """Type of an attribute value: text, number, duration-seconds, enum, or elementRef."""

    name: str
    enum_values: tuple[str, ...] = ()
    ref_kind: str = ""

    def render(self) -> str:
        if self.name == "enum":
            return "enum(%s)" % ", ".join(self.enum_values)
        if self.name == "elementRef":
            return "elementRef(%s)" % self.ref_kind
        return self.name


TEXT = ValueType("text")
NUMBER = ValueType("number")
DURATION = ValueType("duration-seconds")


def enum_of(*values: str) -> ValueType:
    return ValueType("enum", enum_values=tuple(values))


def ref_to(kind: str) -> ValueType:
    return ValueType("elementRef", ref_kind=kind)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    value_type: ValueType
    required: bool = False
    default: AttrValue | None = None


@dataclass(frozen=True)
class ElementKind:
    name: str
    role: str
    attributes: tuple[AttributeSpec, ...] = ()
    source_kind: str = ""  # edge role only
    target_kind: str = ""  # edge role only

    def attribute(self, name: str) -> AttributeSpec | None:
        for spec in self.attributes:
            if spec.name == name:
                return spec
        return None


@dataclass(frozen=True)
class ConstraintSpec:
    id: str
    kind: str
    params: Mapping[str, str]
    severity: str
    message: str


@dataclass(frozen=True)
class NuanceSpec:
    id: str
    effect: str
    params: Mapping[str, str]
    reason: str


@dataclass(frozen=True)
class PredicateSpec:
    kind: str
    params: Mapping[str, str]


@dataclass(frozen=True)
class MethodStep:
    id: str
    title: str
    description: str
    completion: PredicateSpec


@dataclass(frozen=True)
class MethodSpec:
    steps: tuple[MethodStep, ...] = ()


@dataclass(frozen=True)
class DocEntry:
    element: str
    attribute: str | None
    description: str


@dataclass(frozen=True)
class BuildingBlock:
    name: str
    extends: str | None = None
    elements: tuple[ElementKind, ...] = ()
    constraints: tuple[ConstraintSpec, ...] = ()
    method: MethodSpec = MethodSpec()
    nuances: tuple[NuanceSpec, ...] = ()
    docs: tuple[DocEntry, ...] = ()


@dataclass(frozen=True)
class DefinitionIssue:
    """A static problem in a block definition (dangling reference, duplicate id, bad params)."""

    block: str
    subject: str
    message: str

    def render(self) -> str:
        return f"{self.block}: {self.subject}: {self.message}"


# ---------------------------------------------------------------------------
# Model instance types


@dataclass(frozen=True)
class ModelElement:
    """One element of a model: a node, an edge, or a datum.

    Edge endpoints are stored in ``attrs`` under the reserved keys ``source``
    and ``target`` and hold node element names.
    """

    name: str
    kind: str
    attrs: Mapping[str, AttrValue] = field(default_factory=dict)

    def attr(self, name: str) -> AttrValue | None:
        if name == "name":
            return self.name
        return self.attrs.get(name)


@dataclass(frozen=True)
class Model:
    id: str
    block_name: str
    elements: tuple[ModelElement, ...] = ()
    version: int = 1

    def element(self, kind: str, name: str) -> ModelElement | None:
        for el in self.elements:
            if el.kind == kind and el.name == name:
                return el
        return None

    def of_kind(self, kind: str) -> list[ModelElement]:
        return [el for el in self.elements if el.kind == kind]


RESERVED_ATTR_KEYS = ("name", "source", "target")


# ---------------------------------------------------------------------------
# Selectors

_SELECTOR_RE = re.compile(
    r"(?P<kind>[A-Za-z_][A-Za-z0-9_-]*)"
    r"(?:\[(?P<attr>[A-Za-z_][A-Za-z0-9_-]*)=(?P<value>[^\]]*)\])?\Z"
)


@dataclass(frozen=True)
class Selector:
    """Matches elements by kind, optionally filtered by one attribute value.

    Written ``Kind`` or ``Kind[attr=value]``; ``name`` is a valid attribute.
    """

    kind: str
    attr: str | None = None
    value: str = ""

    def matches(self, element: ModelElement) -> bool:
        if element.kind != self.kind:
            return False
        if self.attr is None:
            return True
        actual = element.attr(self.attr)
        return actual is not None and str(actual) == self.value

    def render(self) -> str:
        if self.attr is None:
            return self.kind
        return f"{self.kind}[{self.attr}={self.value}]"


def parse_selector(text: str) -> Selector | None:
    """Parse a selector token; returns None when the text is not a selector."""
    m = _SELECTOR_RE.match(text.strip())
    if not m:
        return None
    return Selector(m.group("kind"), m.group("attr"), m.group("value") or "")


# ---------------------------------------------------------------------------
# Kind lookup with implicit attributes


class KindTable:
    """Lookup over declared element kinds, including implicit attributes."""

    def __init__(self, elements: Iterable[ElementKind]):
        self._by_name: dict[str, ElementKind] = {}
        for el in elements:
            self._by_name.setdefault(el.name, el)

    def get(self, name: str) -> ElementKind | None:
        return self._by_name.get(name)

    def names(self) -> list[str]:
        return list(self._by_name)

    def has_attr(self, kind_name: str, attr: str) -> bool:
        kind = self._by_name.get(kind_name)
        if kind is None:
            return False
        implicit = IMPLICIT_EDGE_ATTRS if kind.role == EDGE else IMPLICIT_ATTRS
        return attr in implicit or kind.attribute(attr) is not None

    def attr_spec(self, kind_name: str, attr: str) -> AttributeSpec | None:
        kind = self._by_name.get(kind_name)
        return None if kind is None else kind.attribute(attr)


def conforms(value: AttrValue, value_type: ValueType) -> bool:
    """Whether a literal conforms to an attribute's value type."""
    if value_type.name == "text":
        return isinstance(value, str)
    if value_type.name == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if value_type.name == "duration-seconds":
        return isinstance(value, (int, float)) and not isinstance(value, bool) and value >= 0
    if value_type.name == "enum":
        return isinstance(value, str) and value in value_type.enum_values
    if value_type.name == "elementRef":
        # Holds an element name; existence is a model-level check.
        return isinstance(value, (str, int))
    return False


# ---------------------------------------------------------------------------
# Static definition checking


def check_block(block: BuildingBlock) -> list[DefinitionIssue]:
    """Statically check one block definition.

    References into an ancestor cannot be resolved here, so for a block with
    an ``extends`` clause, references to kinds it does not declare itself are
    deferred; the registry re-checks them against the resolved block.
    """
    return check_definitions(
        block.name,
        block.elements,
        block.constraints,
        block.nuances,
        block.method,
        block.docs,
        strict=block.extends is None,
    )


def check_definitions(
    block_name: str,
    elements: tuple[ElementKind, ...],
    constraints: tuple[ConstraintSpec, ...],
    nuances: tuple[NuanceSpec, ...],
    method: MethodSpec,
    docs: tuple[DocEntry, ...],
    strict: bool,
) -> list[DefinitionIssue]:
    """Shared checker for raw blocks (strict=False when extending) and resolved ones."""
    issues: list[DefinitionIssue] = []
    kinds = KindTable(elements)

    def issue(subject: str, message: str) -> None:
        issues.append(DefinitionIssue(block_name, subject, message))

    def kind_known(subject: str, kind_name: str, roles: tuple[str, ...] | None = None) -> bool:
        """True when role checks against the named kind may proceed."""
        kind = kinds.get(kind_name)
        if kind is None:
            if strict:
                issue(subject, f"references undeclared kind '{kind_name}'")
            return False
        if roles is not None and kind.role not in roles:
            issue(subject, f"kind '{kind_name}' has role {kind.role}, expected {' or '.join(roles)}")
            return False
        return True

    def attr_known(subject: str, kind_name: str, attr: str) -> bool:
        if kinds.get(kind_name) is None:
            return False  # already handled by kind_known
        if not kinds.has_attr(kind_name, attr):
            issue(subject, f"kind '{kind_name}' declares no attribute '{attr}'")
            return False
        return True

    _check_elements(elements, issue, strict)
    _check_constraints(constraints, kinds, issue, kind_known, attr_known)
    _check_nuances(nuances, kinds, issue, kind_known, attr_known)
    _check_method(method, issue, kind_known, attr_known, strict)
    _check_docs(docs, issue, kind_known, attr_known, strict)
    return issues


def _check_elements(elements, issue, strict) -> None:
    seen: set[str] = set()
    local = {el.name: el for el in elements}
    for el in elements:
        subject = f"element {el.name}"
        if el.name in seen:
            issue(subject, "duplicate element kind name")
            continue
        seen.add(el.name)
        if el.role not in ROLES:
            issue(subject, f"unknown role '{el.role}'")
        if el.role == EDGE:
            for label, ref in (("source", el.source_kind), ("target", el.target_kind)):
                if not ref:
                    issue(subject, f"edge kind is missing its {label} kind")
                    continue
                ref_kind = local.get(ref)
                if ref_kind is None:
                    # Extensions may point at kinds declared by an ancestor.
                    if strict:
                        issue(subject, f"{label} kind '{ref}' is not declared")
                elif ref_kind.role != NODE:
                    issue(subject, f"{label} kind '{ref}' must be a node kind, not {ref_kind.role}")
        elif el.source_kind or el.target_kind:
            issue(subject, f"{el.role} kinds do not take source/target kinds")
        attr_names: set[str] = set()
        for spec in el.attributes:
            asub = f"element {el.name}.{spec.name}"
            if spec.name in attr_names:
                issue(asub, "duplicate attribute name")
                continue
            attr_names.add(spec.name)
            if spec.name in RESERVED_ATTR_KEYS:
                issue(asub, f"'{spec.name}' is a reserved attribute name")
            vt = spec.value_type
            if vt.name == "enum":
                if not vt.enum_values:
                    issue(asub, "enum value list is empty")
                elif len(set(vt.enum_values)) != len(vt.enum_values):
                    issue(asub, "enum value list has duplicates")
            if vt.name == "elementRef":
                ref = local.get(vt.ref_kind)
                if ref is None and strict:
                    issue(asub, f"elementRef kind '{vt.ref_kind}' is not declared")
                if spec.default is not None:
                    issue(asub, "elementRef attributes cannot carry a default")
            elif spec.default is not None and not conforms(spec.default, vt):
                issue(asub, f"default {spec.default!r} does not conform to {vt.render()}")


def _parse_int(value: str) -> int | None:
    try:
        return int(value)
    except (TypeError, ValueError):
        return None


def _check_selector_param(subject, params, key, issue, kind_known, attr_known,
                          required: bool, roles=(NODE,)) -> None:
    raw = params.get(key)
    if raw is None:
        if required:
            issue(subject, f"missing required parameter '{key}'")
        return
    sel = parse_selector(raw)
    if sel is None:
        issue(subject, f"parameter '{key}' is not a valid selector: {raw!r}")
        return
    if kind_known(subject, sel.kind, roles) and sel.attr is not None:
        attr_known(subject, sel.kind, sel.attr)


def _check_bound_clause(subject, params, suffix, issue, kind_known, attr_known) -> None:
    _check_selector_param(subject, params, "selector" + suffix, issue, kind_known, attr_known, True)
    direction = params.get("direction" + suffix)
    if direction is None:
        issue(subject, f"missing required parameter 'direction{suffix}'")
    elif direction not in ("in", "out"):
        issue(subject, f"direction{suffix} must be 'in' or 'out', not {direction!r}")
    lo, hi = params.get("min" + suffix), params.get("max" + suffix)
    if lo is None and hi is None:
        issue(subject, f"degree bound needs min{suffix} or max{suffix}")
    for label, raw in (("min" + suffix, lo), ("max" + suffix, hi)):
        if raw is not None and (_parse_int(raw) is None or _parse_int(raw) < 0):
            issue(subject, f"{label} must be a non-negative integer, not {raw!r}")
    _check_selector_param(subject, params, "counterpart" + suffix, issue, kind_known, attr_known, False)
    via = params.get("via" + suffix)
    if via is not None:
        kind_known(subject, via, (EDGE,))


def check_constraint_params(
    subject: str,
    kind: str,
    params: Mapping[str, str],
    issue,
    kind_known,
    attr_known,
) -> None:
    """Validate a parameter map against one constraint catalog kind."""

    def need(*keys: str) -> bool:
        ok = True
        for key in keys:
            if key not in params:
                issue(subject, f"missing required parameter '{key}'")
                ok = False
        return ok

    if kind == "reachability":
        _check_selector_param(subject, params, "root", issue, kind_known, attr_known, True)
        if "via" in params:
            kind_known(subject, params["via"], (EDGE,))
    elif kind == "no-parallel-edges":
        if need("kind"):
            kind_known(subject, params["kind"], (EDGE,))
    elif kind == "degree-bound":
        _check_bound_clause(subject, params, "", issue, kind_known, attr_known)
        if any(k.endswith("2") for k in params):
            _check_bound_clause(subject, params, "2", issue, kind_known, attr_known)
    elif kind == "edge-attribute-required":
        if need("kind", "attr") and kind_known(subject, params["kind"], (EDGE,)):
            attr_known(subject, params["kind"], params["attr"])
    elif kind == "duration-well-formed":
        if need("kind", "attr") and kind_known(subject, params["kind"]):
            attr_known(subject, params["kind"], params["attr"])
        pattern = params.get("pattern")
        if pattern is not None:
            try:
                re.compile(pattern)
            except re.error as exc:
                issue(subject, f"pattern does not compile: {exc}")
        else:
            issue(subject, "missing required parameter 'pattern'")
    elif kind == "forbid-element-value":
        if need("kind", "attr", "value") and kind_known(subject, params["kind"]):
            attr_known(subject, params["kind"], params["attr"])
    elif kind == "no-isolated-nodes":
        if need("kind"):
            kind_known(subject, params["kind"], (NODE,))
    else:
        issue(subject, f"unknown constraint kind '{kind}'")


def _check_constraints(constraints, kinds, issue, kind_known, attr_known) -> None:
    seen: set[str] = set()
    for c in constraints:
        subject = f"constraint {c.id}"
        if c.id in seen:
            issue(subject, "duplicate constraint id")
            continue
        seen.add(c.id)
        if c.severity not in SEVERITIES:
            issue(subject, f"severity must be one of {SEVERITIES}, not {c.severity!r}")
        if not c.message:
            issue(subject, "message must not be empty")
        if c.kind not in CONSTRAINT_KINDS:
            issue(subject, f"unknown constraint kind '{c.kind}'")
            continue
        check_constraint_params(subject, c.kind, c.params, issue, kind_known, attr_known)
        # Enum-typed forbid values must name a declared enum value.
        if c.kind == "forbid-element-value":
            spec = kinds.attr_spec(c.params.get("kind", ""), c.params.get("attr", ""))
            value = c.params.get("value")
            if spec is not None and spec.value_type.name == "enum" and value is not None:
                if value not in spec.value_type.enum_values:
                    issue(subject, f"value {value!r} is not one of the declared enum values")


def _literal_conforms_text(raw: str, value_type: ValueType) -> bool:
    """Best-effort conformance for a raw parameter string against a value type."""
    if value_type.name == "enum":
        return raw in value_type.enum_values
    if value_type.name in ("number", "duration-seconds"):
        try:
            float(raw)
        except ValueError:
            return False
        return True
    return True


def _check_nuances(nuances, kinds, issue, kind_known, attr_known) -> None:
    seen: set[str] = set()
    for n in nuances:
        subject = f"nuance {n.id}"
        if n.id in seen:
            issue(subject, "duplicate nuance id")
            continue
        seen.add(n.id)
        if not n.reason.strip():
            issue(subject, "reason text is mandatory")
        if n.effect not in NUANCE_EFFECTS:
            issue(subject, f"unknown nuance effect '{n.effect}'")
            continue
        params = n.params

        def need(*keys: str) -> bool:
            ok = True
            for key in keys:
                if key not in params:
                    issue(subject, f"missing required parameter '{key}'")
                    ok = False
            return ok

        if n.effect == "auto-create":
            if not need("kind", "name"):
                continue
            if not kind_known(subject, params["kind"], (NODE, DATUM)):
                continue
            kind = kinds.get(params["kind"])
            for key, raw in params.items():
                if key in ("kind", "name"):
                    continue
                spec = kind.attribute(key) if kind else None
                if spec is None:
                    issue(subject, f"kind '{params['kind']}' declares no attribute '{key}'")
                elif not _literal_conforms_text(raw, spec.value_type):
                    issue(subject, f"value {raw!r} does not conform to {spec.value_type.render()}")
        elif n.effect == "shape":
            _check_selector_param(subject, params, "selector", issue, kind_known, attr_known, True)
            shape = params.get("shape")
            if shape is None:
                issue(subject, "missing required parameter 'shape'")
            elif shape not in SHAPES:
                issue(subject, f"shape must be one of {SHAPES}, not {shape!r}")
        elif n.effect == "fill":
            _check_selector_param(subject, params, "selector", issue, kind_known, attr_known, True)
            has_color = "color" in params
            has_policy = "policy" in params
            if has_color == has_policy:
                issue(subject, "fill needs exactly one of 'color' or 'policy'")
            if has_policy and params["policy"] != "distinct":
                issue(subject, f"unknown fill policy {params['policy']!r}")
        elif n.effect == "badge":
            if not need("kind", "attr"):
                continue
            if not kind_known(subject, params["kind"]):
                continue
            if not attr_known(subject, params["kind"], params["attr"]):
                continue
            corner = params.get("corner")
            if corner is not None and corner not in CORNERS:
                issue(subject, f"corner must be one of {CORNERS}, not {corner!r}")
            spec = kinds.attr_spec(params["kind"], params["attr"])
            mappings = {k: v for k, v in params.items()
                        if k not in ("kind", "attr", "corner", "color")}
            if not mappings:
                issue(subject, "badge needs at least one value-to-glyph mapping")
            elif spec is not None and spec.value_type.name == "enum":
                for value in mappings:
                    if value not in spec.value_type.enum_values:
                        issue(subject, f"badge value {value!r} is not a declared enum value")
        elif n.effect == "violation-marker":
            if not need("check", "severity"):
                continue
            check = params["check"]
            if check not in CONSTRAINT_KINDS:
                issue(subject, f"unknown check kind '{check}'")
                continue
            if params["severity"] not in SEVERITIES:
                issue(subject, f"severity must be one of {SEVERITIES}")
            inner = {k: v for k, v in params.items()
                     if k not in ("check", "severity", "message")}
            check_constraint_params(subject, check, inner, issue, kind_known, attr_known)
        elif n.effect == "edge-style":
            if not need("kind", "color"):
                continue
            if not kind_known(subject, params["kind"], (EDGE,)):
                continue
            if "when-missing" in params:
                attr_known(subject, params["kind"], params["when-missing"])
                if "severity" not in params:
                    issue(subject, "edge-style with 'when-missing' needs a 'severity'")
                elif params["severity"] not in SEVERITIES:
                    issue(subject, f"severity must be one of {SEVERITIES}")
        elif n.effect == "icon-slot":
            if not need("kind", "attr"):
                continue
            if kind_known(subject, params["kind"]):
                if attr_known(subject, params["kind"], params["attr"]):
                    spec = kinds.attr_spec(params["kind"], params["attr"])
                    if spec is not None and spec.value_type.name != "text":
                        issue(subject, "icon-slot attribute must be text-typed")
        elif n.effect == "layout-order":
            _check_selector_param(subject, params, "selector", issue, kind_known, attr_known, True)
            if "order" not in params:
                issue(subject, "missing required parameter 'order'")


def _check_method(method, issue, kind_known, attr_known, strict) -> None:
    if strict and not method.steps:
        issue("method", "method must declare at least one step")
    seen: set[str] = set()
    for step in method.steps:
        subject = f"step {step.id}"
        if step.id in seen:
            issue(subject, "duplicate step id")
            continue
        seen.add(step.id)
        if not step.title.strip():
            issue(subject, "step title must not be empty")
        pred = step.completion
        params = pred.params
        if pred.kind == "element-count-at-least":
            kind = params.get("kind")
            if kind is None:
                issue(subject, "missing required parameter 'kind'")
            else:
                kind_known(subject, kind)
            n = params.get("n")
            if n is None or _parse_int(n) is None or _parse_int(n) < 1:
                issue(subject, f"n must be a positive integer, not {n!r}")
        elif pred.kind == "all-of-kind-have-attribute":
            kind, attr = params.get("kind"), params.get("attr")
            if kind is None or attr is None:
                issue(subject, "predicate needs 'kind' and 'attr'")
            elif kind_known(subject, kind):
                attr_known(subject, kind, attr)
        elif pred.kind == "model-valid":
            severity = params.get("severity")
            if severity not in SEVERITIES:
                issue(subject, f"severity must be one of {SEVERITIES}, not {severity!r}")
        elif pred.kind == "manual-confirm":
            if params:
                issue(subject, "manual-confirm takes no parameters")
        else:
            issue(subject, f"unknown completion predicate '{pred.kind}'")


def _check_docs(docs, issue, kind_known, attr_known, strict) -> None:
    seen: set[tuple[str, str | None]] = set()
    for entry in docs:
        label = entry.element if entry.attribute is None else f"{entry.element}.{entry.attribute}"
        subject = f"doc {label}"
        key = (entry.element, entry.attribute)
        if key in seen:
            issue(subject, "duplicate documentation entry")
            continue
        seen.add(key)
        if not entry.description.strip():
            issue(subject, "description must not be empty")
        if kind_known(subject, entry.element) and entry.attribute is not None:
            attr_known(subject, entry.element, entry.attribute)
