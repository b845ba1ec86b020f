"""Model lifecycle: instantiation, change application, persistence.

Models are immutable values; applying a change set returns a new model at
version+1 and leaves the input untouched. A ChangeSet only applies when its
base version matches the model's current version, which gives the service
optimistic concurrency for free.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .core import (
    AttrValue,
    BlockbenchError,
    ElementKind,
    KindTable,
    Model,
    ModelElement,
    RESERVED_ATTR_KEYS,
    conforms,
)
from .parsing import parse_model, serialize_model
from .registry import EffectiveBlock

MODEL_ID_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*\Z")

OP_KINDS = ("add-element", "add-edge", "set-attr", "remove-element", "remove-edge")


class ChangeError(BlockbenchError):
    """A change set cannot be applied to the model it targets."""


class VersionConflictError(BlockbenchError):
    def __init__(self, expected: int, current: int):
        self.expected = expected
        self.current = current
        super().__init__(
            f"change set targets version {expected} but the model is at version {current}"
        )


class ModelExistsError(BlockbenchError):
    def __init__(self, model_id: str):
        self.model_id = model_id
        super().__init__(f"model '{model_id}' already exists")


class ModelNotFoundError(BlockbenchError):
    def __init__(self, model_id: str):
        self.model_id = model_id
        super().__init__(f"model '{model_id}' does not exist")


@dataclass(frozen=True)
class ChangeOp:
    op: str
    kind: str
    name: str
    attrs: Mapping[str, AttrValue] = field(default_factory=dict)
    attr: str = ""
    value: AttrValue | None = None
    source: str = ""
    target: str = ""


@dataclass(frozen=True)
class ChangeSet:
    base_version: int
    ops: tuple[ChangeOp, ...] = ()


def _coerce_param(raw: str, kind: ElementKind, attr: str) -> AttrValue:
    """Auto-create nuance params arrive as text; number-like attrs coerce."""
    spec = kind.attribute(attr)
    if spec is not None and spec.value_type.name in ("number", "duration-seconds"):
        try:
            return int(raw)
        except ValueError:
            return float(raw)
    return raw


def _with_defaults(kind: ElementKind, attrs: dict[str, AttrValue]) -> dict[str, AttrValue]:
    for spec in kind.attributes:
        if spec.default is not None and spec.name not in attrs:
            attrs[spec.name] = spec.default
    return attrs


def instantiate(block: EffectiveBlock, model_id: str) -> Model:
    """A fresh model holding exactly what the block's auto-create nuances demand."""
    if not MODEL_ID_RE.match(model_id):
        raise ChangeError(f"invalid model id {model_id!r}")
    kinds = KindTable(block.elements)
    elements: list[ModelElement] = []
    for nuance in block.nuances:
        if nuance.effect != "auto-create":
            continue
        kind = kinds.get(nuance.params["kind"])
        assert kind is not None, "excluded by static checks"
        attrs = {
            key: _coerce_param(raw, kind, key)
            for key, raw in nuance.params.items()
            if key not in ("kind", "name")
        }
        elements.append(
            ModelElement(
                name=nuance.params["name"],
                kind=kind.name,
                attrs=_with_defaults(kind, attrs),
            )
        )
    model = Model(id=model_id, block_name=block.name, elements=tuple(elements), version=1)
    problems = check_elements(block, model.elements)
    if problems:
        raise ChangeError("auto-created elements conflict: " + "; ".join(problems))
    return model


def check_elements(block: EffectiveBlock, elements: Iterable[ModelElement]) -> list[str]:
    """Structural problems of an element list against a block, as messages.

    Covers (kind, name) uniqueness, declared kinds, value-type conformance,
    required attributes, edge endpoints, and elementRef targets. Shared by
    apply_change and the service's full-replace path.
    """
    kinds = KindTable(block.elements)
    elements = list(elements)
    problems: list[str] = []
    seen: set[tuple[str, str]] = set()
    by_kind_name = {(el.kind, el.name) for el in elements}

    for el in elements:
        label = f"[{el.kind}: {el.name}]"
        key = (el.kind, el.name)
        if key in seen:
            problems.append(f"duplicate element {label}")
            continue
        seen.add(key)
        kind = kinds.get(el.kind)
        if kind is None:
            problems.append(f"{label}: unknown element kind '{el.kind}'")
            continue
        if not MODEL_ID_RE.match(el.name):
            problems.append(f"{label}: invalid element name")
        declared = {spec.name for spec in kind.attributes}
        structural = ("source", "target") if kind.role == "edge" else ()
        for attr_name, value in el.attrs.items():
            if attr_name in structural:
                continue
            if attr_name in RESERVED_ATTR_KEYS:
                problems.append(f"{label}: attribute '{attr_name}' is reserved")
                continue
            if attr_name not in declared:
                problems.append(f"{label}: kind '{el.kind}' declares no attribute '{attr_name}'")
                continue
            spec = kind.attribute(attr_name)
            if not conforms(value, spec.value_type):
                problems.append(
                    f"{label}: attribute '{attr_name}' value {value!r} does not conform"
                    f" to {spec.value_type.render()}"
                )
            elif spec.value_type.name == "elementRef":
                if (spec.value_type.ref_kind, str(value)) not in by_kind_name:
                    problems.append(
                        f"{label}: attribute '{attr_name}' references missing"
                        f" [{spec.value_type.ref_kind}: {value}]"
                    )
        for spec in kind.attributes:
            if spec.required and spec.name not in el.attrs:
                problems.append(f"{label}: required attribute '{spec.name}' is missing")
        if kind.role == "edge":
            for side, endpoint_kind in (("source", kind.source_kind), ("target", kind.target_kind)):
                endpoint = el.attrs.get(side)
                if endpoint is None:
                    problems.append(f"{label}: edge is missing its {side}")
                elif (endpoint_kind, str(endpoint)) not in by_kind_name:
                    problems.append(
                        f"{label}: {side} names missing [{endpoint_kind}: {endpoint}]"
                    )
        elif "source" in el.attrs or "target" in el.attrs:
            problems.append(f"{label}: only edges carry source/target")
    return problems


def apply_change(model: Model, change: ChangeSet, block: EffectiveBlock) -> Model:
    """Apply a change set atomically; any failure leaves the model value as-is."""
    if change.base_version != model.version:
        raise VersionConflictError(change.base_version, model.version)
    kinds = KindTable(block.elements)
    elements: list[ModelElement] = list(model.elements)

    def find(kind: str, name: str) -> int:
        for idx, el in enumerate(elements):
            if el.kind == kind and el.name == name:
                return idx
        raise ChangeError(f"no element [{kind}: {name}] in the model")

    for op in change.ops:
        if op.op not in OP_KINDS:
            raise ChangeError(f"unknown op '{op.op}'")
        kind = kinds.get(op.kind)
        if kind is None:
            raise ChangeError(f"unknown element kind '{op.kind}'")
        label = f"[{op.kind}: {op.name}]"

        if op.op in ("add-element", "add-edge"):
            attrs = dict(op.attrs)
            bad = sorted(set(attrs) & set(RESERVED_ATTR_KEYS))
            if bad:
                raise ChangeError(f"{label}: attribute '{bad[0]}' is reserved")
            if op.op == "add-edge":
                if kind.role != "edge":
                    raise ChangeError(f"{label}: kind '{op.kind}' is not an edge kind")
                attrs["source"] = op.source
                attrs["target"] = op.target
            elif kind.role == "edge":
                raise ChangeError(f"{label}: use add-edge for edge kinds")
            elements.append(ModelElement(op.name, op.kind, _with_defaults(kind, attrs)))
        elif op.op == "set-attr":
            idx = find(op.kind, op.name)
            if op.attr in RESERVED_ATTR_KEYS:
                raise ChangeError(f"{label}: attribute '{op.attr}' is reserved")
            spec = kind.attribute(op.attr)
            if spec is None:
                raise ChangeError(f"{label}: kind '{op.kind}' declares no attribute '{op.attr}'")
            el = elements[idx]
            attrs = dict(el.attrs)
            if op.value is None:
                if spec.required:
                    raise ChangeError(f"{label}: required attribute '{op.attr}' cannot be unset")
                attrs.pop(op.attr, None)
            else:
                attrs[op.attr] = op.value
            elements[idx] = ModelElement(el.name, el.kind, attrs)
        elif op.op in ("remove-element", "remove-edge"):
            idx = find(op.kind, op.name)
            if op.op == "remove-edge" and kind.role != "edge":
                raise ChangeError(f"{label}: kind '{op.kind}' is not an edge kind")
            if kind.role == "node":
                blocking = [
                    f"[{el.kind}: {el.name}]"
                    for el in elements
                    if _edge_touches(kinds.get(el.kind), el, op.kind, op.name)
                ]
                if blocking:
                    raise ChangeError(
                        f"{label}: remove incident edges first: " + ", ".join(sorted(blocking))
                    )
            del elements[idx]
            _unset_dangling_refs(kinds, elements, op.kind, op.name, label)

    result = Model(
        id=model.id,
        block_name=model.block_name,
        elements=tuple(elements),
        version=model.version + 1,
    )
    problems = check_elements(block, result.elements)
    if problems:
        raise ChangeError("; ".join(problems))
    return result


def _edge_touches(kind: ElementKind | None, el: ModelElement, node_kind: str, name: str) -> bool:
    if kind is None or kind.role != "edge":
        return False
    touches_source = kind.source_kind == node_kind and str(el.attrs.get("source")) == name
    touches_target = kind.target_kind == node_kind and str(el.attrs.get("target")) == name
    return touches_source or touches_target


def _unset_dangling_refs(
    kinds: KindTable,
    elements: list[ModelElement],
    removed_kind: str,
    removed_name: str,
    label: str,
) -> None:
    """Clear elementRef attrs pointing at a removed element.

    A required reference cannot be cleared, so removal fails instead."""
    for idx, el in enumerate(elements):
        kind = kinds.get(el.kind)
        if kind is None:
            continue
        cleared = None
        for spec in kind.attributes:
            vt = spec.value_type
            if vt.name != "elementRef" or vt.ref_kind != removed_kind:
                continue
            if str(el.attrs.get(spec.name)) != removed_name:
                continue
            if spec.required:
                raise ChangeError(
                    f"{label}: [{el.kind}: {el.name}] requires it via '{spec.name}'"
                )
            cleared = dict(el.attrs) if cleared is None else cleared
            cleared.pop(spec.name, None)
        if cleared is not None:
            elements[idx] = ModelElement(el.name, el.kind, cleared)


# ---------------------------------------------------------------------------
# Persistence


def save(model: Model, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{model.id}.dslm"
    path.write_text(serialize_model(model), encoding="utf-8")
    return path


def load(path: str | Path) -> Model:
    return parse_model(Path(path).read_bytes())


class ModelStore:
    """Persistent models under <workspace>/models, one .dslm file per id.

    Reads come from a write-through cache; change application is serialized
    per model id so concurrent service requests contend only on versions.
    """

    def __init__(self, workspace_dir: str | Path):
        self.models_dir = Path(workspace_dir) / "models"
        self._cache: dict[str, Model] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._meta = threading.Lock()

    def _lock(self, model_id: str) -> threading.Lock:
        with self._meta:
            return self._locks.setdefault(model_id, threading.Lock())

    def path_of(self, model_id: str) -> Path:
        if not MODEL_ID_RE.match(model_id):
            raise ModelNotFoundError(model_id)
        return self.models_dir / f"{model_id}.dslm"

    def exists(self, model_id: str) -> bool:
        return MODEL_ID_RE.match(model_id) is not None and self.path_of(model_id).is_file()

    def list_ids(self) -> list[str]:
        if not self.models_dir.is_dir():
            return []
        return sorted(p.stem for p in self.models_dir.glob("*.dslm"))

    def create(self, block: EffectiveBlock, model_id: str) -> Model:
        with self._lock(model_id):
            if self.exists(model_id):
                raise ModelExistsError(model_id)
            model = instantiate(block, model_id)
            save(model, self.models_dir)
            self._cache[model_id] = model
            return model

    def get(self, model_id: str) -> Model:
        with self._lock(model_id):
            cached = self._cache.get(model_id)
            if cached is not None:
                return cached
            path = self.path_of(model_id)
            if not path.is_file():
                raise ModelNotFoundError(model_id)
            model = load(path)
            self._cache[model_id] = model
            return model

    def put(self, model: Model) -> None:
        """Persist an already-validated model value (full replace)."""
        with self._lock(model.id):
            save(model, self.models_dir)
            self._cache[model.id] = model

    def apply(self, model_id: str, change: ChangeSet, block: EffectiveBlock) -> Model:
        with self._lock(model_id):
            current = self._current(model_id)
            updated = apply_change(current, change, block)
            save(updated, self.models_dir)
            self._cache[model_id] = updated
            return updated

    def replace(
        self,
        model_id: str,
        base_version: int,
        elements: Iterable[ModelElement],
        block: EffectiveBlock,
    ) -> Model:
        """Full-body replacement under the same optimistic version rule."""
        with self._lock(model_id):
            current = self._current(model_id)
            if base_version != current.version:
                raise VersionConflictError(base_version, current.version)
            kinds = KindTable(block.elements)
            filled = []
            for el in elements:
                kind = kinds.get(el.kind)
                if kind is not None:
                    el = ModelElement(el.name, el.kind, _with_defaults(kind, dict(el.attrs)))
                filled.append(el)
            candidate = Model(
                id=current.id,
                block_name=current.block_name,
                elements=tuple(filled),
                version=current.version + 1,
            )
            problems = check_elements(block, candidate.elements)
            if problems:
                raise ChangeError("; ".join(problems))
            save(candidate, self.models_dir)
            self._cache[model_id] = candidate
            return candidate

    def _current(self, model_id: str) -> Model:
        cached = self._cache.get(model_id)
        if cached is not None:
            return cached
        path = self.path_of(model_id)
        if not path.is_file():
            raise ModelNotFoundError(model_id)
        return load(path)
