"""Constraint evaluation over a model bound to an effective block.

validate() first binds the model: element kinds must resolve, the graph must
be structurally sound, and attribute defaults are materialized so selectors
see them. Binding failures yield a single fatal diagnostic and suppress
constraint evaluation; attribute-level mismatches are reported alongside the
constraint results instead.

Nuances that embed a check (violation-marker, edge-style with a when-missing
attribute) are evaluated here too; their diagnostics carry the nuance id both
as code and as the marker the renderer picks up.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    EDGE,
    KindTable,
    Model,
    ModelElement,
    Selector,
    conforms,
    parse_selector,
)
from .registry import EffectiveBlock

BINDING_CODE = "binding"

_SEVERITY_RANK = {"warning": 1, "error": 2}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    targets: tuple[str, ...]
    message: str
    nuance_marker: str | None = None


def severity_rank(severity: str) -> int:
    return _SEVERITY_RANK.get(severity, 0)


def diagnostic_line(diag: Diagnostic) -> str:
    """Stable one-line rendering shared by the CLI and the service."""
    return f"{diag.severity} {diag.code} [{', '.join(diag.targets)}] {diag.message}"


def explain(diag: Diagnostic, block: EffectiveBlock) -> str:
    """The message, extended with the marker nuance's reason when one applies."""
    if diag.nuance_marker:
        nuance = block.nuance(diag.nuance_marker)
        if nuance is not None and nuance.reason:
            return f"{diag.message} Reason: {nuance.reason}"
    return diag.message


def _render(template: str, targets: tuple[str, ...]) -> str:
    out = template.replace("{elements}", ", ".join(targets))
    return out.replace("{element}", targets[0] if targets else "")


@dataclass
class _Bound:
    """Model view with defaults materialized and lookup tables built."""

    kinds: KindTable
    elements: list[ModelElement] = field(default_factory=list)
    by_key: dict[tuple[str, str], ModelElement] = field(default_factory=dict)
    edges: list[ModelElement] = field(default_factory=list)
    fatal: list[str] = field(default_factory=list)
    soft: list[Diagnostic] = field(default_factory=list)

    def matching(self, selector: Selector) -> list[ModelElement]:
        return [el for el in self.elements if selector.matches(el)]


def _bind(model: Model, block: EffectiveBlock) -> _Bound:
    bound = _Bound(kinds=KindTable(block.elements))
    unknown = sorted({el.kind for el in model.elements if bound.kinds.get(el.kind) is None})
    if unknown:
        kinds = ", ".join(f"'{k}'" for k in unknown)
        bound.fatal.append(f"model references element kinds absent from the block: {kinds}")
        return bound

    seen: set[tuple[str, str]] = set()
    names = {(el.kind, el.name) for el in model.elements}
    for el in model.elements:
        label = f"[{el.kind}: {el.name}]"
        key = (el.kind, el.name)
        if key in seen:
            bound.fatal.append(f"duplicate element {label}")
            continue
        seen.add(key)
        kind = bound.kinds.get(el.kind)
        attrs = dict(el.attrs)
        if kind.role == EDGE:
            for side, endpoint_kind in (("source", kind.source_kind), ("target", kind.target_kind)):
                endpoint = attrs.get(side)
                if endpoint is None:
                    bound.fatal.append(f"{label}: edge is missing its {side}")
                elif (endpoint_kind, str(endpoint)) not in names:
                    bound.fatal.append(f"{label}: {side} names missing [{endpoint_kind}: {endpoint}]")
        elif "source" in attrs or "target" in attrs:
            bound.fatal.append(f"{label}: only edges carry source/target")
        for spec in kind.attributes:
            value = attrs.get(spec.name)
            if value is None:
                if spec.default is not None:
                    attrs[spec.name] = spec.default
                elif spec.required:
                    bound.soft.append(
                        Diagnostic(
                            BINDING_CODE,
                            "error",
                            (el.name,),
                            f"{label}: required attribute '{spec.name}' is missing",
                        )
                    )
                continue
            if not conforms(value, spec.value_type):
                bound.soft.append(
                    Diagnostic(
                        BINDING_CODE,
                        "error",
                        (el.name,),
                        f"{label}: attribute '{spec.name}' value {value!r} does not"
                        f" conform to {spec.value_type.render()}",
                    )
                )
            elif spec.value_type.name == "elementRef":
                if (spec.value_type.ref_kind, str(value)) not in names:
                    bound.fatal.append(
                        f"{label}: attribute '{spec.name}' references missing"
                        f" [{spec.value_type.ref_kind}: {value}]"
                    )
        declared = {spec.name for spec in kind.attributes}
        structural = ("source", "target") if kind.role == EDGE else ()
        for attr_name in attrs:
            if attr_name not in declared and attr_name not in structural:
                bound.soft.append(
                    Diagnostic(
                        BINDING_CODE,
                        "error",
                        (el.name,),
                        f"{label}: kind '{el.kind}' declares no attribute '{attr_name}'",
                    )
                )
        fixed = ModelElement(el.name, el.kind, attrs)
        bound.elements.append(fixed)
        bound.by_key[key] = fixed
        if kind.role == EDGE:
            bound.edges.append(fixed)
    return bound


def bound_elements(model: Model, block: EffectiveBlock) -> list[ModelElement]:
    """The model's elements with attribute defaults materialized.

    The renderer shares this view so selectors and badges see default values
    exactly as validate does."""
    return _bind(model, block).elements


# ---------------------------------------------------------------------------
# Reachability


def reachable_set(
    model: Model, root_selector: Selector | str, via: str | None = None
) -> set[str]:
    """Names of elements reachable from any root along directed edges.

    Roots are included. Edges are the elements carrying source/target attrs,
    optionally restricted to one kind with via. Needs no block: structure is
    read off the elements themselves.
    """
    selector = parse_selector(root_selector) if isinstance(root_selector, str) else root_selector
    if selector is None:
        raise ValueError(f"not a selector: {root_selector!r}")
    out_edges: dict[str, set[str]] = {}
    for el in model.elements:
        if via is not None and el.kind != via:
            continue
        source, target = el.attrs.get("source"), el.attrs.get("target")
        if source is None or target is None:
            continue
        out_edges.setdefault(str(source), set()).add(str(target))
    frontier = [el.name for el in model.elements if selector.matches(el)]
    reached = set(frontier)
    while frontier:
        name = frontier.pop()
        for nxt in out_edges.get(name, ()):
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    return reached


# ---------------------------------------------------------------------------
# Catalog evaluation


def _eval_check(
    check: str, params, bound: _Bound, code: str, severity: str, template: str, marker: str | None
) -> list[Diagnostic]:
    targets_per_diag: list[tuple[str, ...]] = []

    if check == "reachability":
        root = parse_selector(params["root"])
        via = params.get("via")
        view = Model(id="", block_name="", elements=tuple(bound.elements))
        reached = reachable_set(view, root, via)
        for el in bound.elements:
            if el.kind != root.kind or root.matches(el) or el.name in reached:
                continue
            targets_per_diag.append((el.name,))
    elif check == "no-parallel-edges":
        groups: dict[tuple[str, str], list[str]] = {}
        for el in bound.edges:
            if el.kind != params["kind"]:
                continue
            pair = (str(el.attrs["source"]), str(el.attrs["target"]))
            groups.setdefault(pair, []).append(el.name)
        for names in groups.values():
            if len(names) > 1:
                targets_per_diag.append(tuple(sorted(names)))
    elif check == "degree-bound":
        targets_per_diag.extend(_eval_degree_clause(params, "", bound))
        if any(k.endswith("2") for k in params):
            targets_per_diag.extend(_eval_degree_clause(params, "2", bound))
    elif check == "edge-attribute-required":
        for el in bound.edges:
            if el.kind == params["kind"] and params["attr"] not in el.attrs:
                targets_per_diag.append((el.name,))
    elif check == "duration-well-formed":
        pattern = re.compile(params["pattern"])
        for el in bound.elements:
            if el.kind != params["kind"]:
                continue
            raw = el.attrs.get(params["attr"])
            match = pattern.fullmatch(str(raw)) if raw is not None else None
            if match is None or not _positive_duration(match):
                targets_per_diag.append((el.name,))
    elif check == "forbid-element-value":
        for el in bound.elements:
            if el.kind == params["kind"] and str(el.attrs.get(params["attr"])) == params["value"]:
                targets_per_diag.append((el.name,))
    elif check == "no-isolated-nodes":
        touched = set()
        for el in bound.edges:
            kind = bound.kinds.get(el.kind)
            touched.add((kind.source_kind, str(el.attrs["source"])))
            touched.add((kind.target_kind, str(el.attrs["target"])))
        for el in bound.elements:
            if el.kind == params["kind"] and (el.kind, el.name) not in touched:
                targets_per_diag.append((el.name,))
    else:
        raise AssertionError(f"unreachable: checked kind {check!r}")

    seen: set[tuple[str, ...]] = set()
    out = []
    for targets in targets_per_diag:
        if targets in seen:
            continue
        seen.add(targets)
        out.append(Diagnostic(code, severity, targets, _render(template, targets), marker))
    return out


def _eval_degree_clause(params, suffix: str, bound: _Bound) -> list[tuple[str, ...]]:
    selector = parse_selector(params["selector" + suffix])
    direction = params["direction" + suffix]
    lo = int(params.get("min" + suffix, 0))
    hi_raw = params.get("max" + suffix)
    hi = int(hi_raw) if hi_raw is not None else None
    counterpart_raw = params.get("counterpart" + suffix)
    counterpart = parse_selector(counterpart_raw) if counterpart_raw else None
    via = params.get("via" + suffix)

    near, far = ("target", "source") if direction == "in" else ("source", "target")
    violating: list[tuple[str, ...]] = []
    for node in bound.matching(selector):
        count = 0
        bad_far = False
        for edge in bound.edges:
            if via is not None and edge.kind != via:
                continue
            kind = bound.kinds.get(edge.kind)
            near_kind = kind.target_kind if direction == "in" else kind.source_kind
            if near_kind != node.kind or str(edge.attrs[near]) != node.name:
                continue
            count += 1
            if counterpart is not None:
                far_kind = kind.source_kind if direction == "in" else kind.target_kind
                far_el = bound.by_key.get((far_kind, str(edge.attrs[far])))
                if far_el is None or not counterpart.matches(far_el):
                    bad_far = True
        if count < lo or (hi is not None and count > hi) or bad_far:
            violating.append((node.name,))
    return violating


def _positive_duration(match: re.Match) -> bool:
    if not match.groups():
        return True
    try:
        return float(match.group(1)) > 0
    except (TypeError, ValueError):
        return False


def validate(model: Model, block: EffectiveBlock) -> list[Diagnostic]:
    """Every constraint and nuance-embedded check of the block, evaluated.

    The list is stably ordered by code then first target; an empty list means
    the model is clean at both severities.
    """
    bound = _bind(model, block)
    if bound.fatal:
        return [
            Diagnostic(BINDING_CODE, "error", (), "; ".join(dict.fromkeys(bound.fatal)))
        ]
    diagnostics: list[Diagnostic] = list(bound.soft)

    for constraint in block.constraints:
        diagnostics.extend(
            _eval_check(
                constraint.kind,
                constraint.params,
                bound,
                code=constraint.id,
                severity=constraint.severity,
                template=constraint.message,
                marker=None,
            )
        )

    for nuance in block.nuances:
        if nuance.effect == "violation-marker":
            inner = {
                k: v for k, v in nuance.params.items() if k not in ("check", "severity", "message")
            }
            diagnostics.extend(
                _eval_check(
                    nuance.params["check"],
                    inner,
                    bound,
                    code=nuance.id,
                    severity=nuance.params["severity"],
                    template=nuance.params.get("message", "{element} fails " + nuance.params["check"]),
                    marker=nuance.id,
                )
            )
        elif nuance.effect == "edge-style" and "when-missing" in nuance.params:
            diagnostics.extend(
                _eval_check(
                    "edge-attribute-required",
                    {"kind": nuance.params["kind"], "attr": nuance.params["when-missing"]},
                    bound,
                    code=nuance.id,
                    severity=nuance.params["severity"],
                    template=nuance.params.get(
                        "message", "{element} is missing " + nuance.params["when-missing"]
                    ),
                    marker=nuance.id,
                )
            )

    diagnostics.sort(key=lambda d: (d.code, d.targets[0] if d.targets else ""))
    return diagnostics
