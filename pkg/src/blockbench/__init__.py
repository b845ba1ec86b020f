"""Workbench for graphical DSL building blocks.

A building block couples a small graph language with a modeling method and
a set of visual nuances. This package parses block and model files, resolves
extension chains, validates models, renders deterministic SVG diagrams,
generates syntax documentation, and walks users through the method steps.
"""

from .core import (
    AttributeSpec,
    BlockbenchError,
    BuildingBlock,
    ConstraintSpec,
    DocEntry,
    ElementKind,
    MethodSpec,
    MethodStep,
    Model,
    ModelElement,
    NuanceSpec,
    PredicateSpec,
    Selector,
    ValueType,
)
from .parsing import (
    ParseError,
    ParseFailure,
    parse_block,
    parse_model,
    serialize_block,
    serialize_model,
)
from .registry import (
    EffectiveBlock,
    ExtensionCycleError,
    ResolutionError,
    UnknownBlockError,
    Workspace,
    list_blocks,
    load_workspace,
    resolve,
)
from .rendering import RenderBindingError, layout, render_model, render_svg
from .store import (
    ChangeError,
    ChangeOp,
    ChangeSet,
    ModelStore,
    VersionConflictError,
    apply_change,
    instantiate,
)
from .validation import Diagnostic, diagnostic_line, explain, reachable_set, validate

__all__ = [
    "AttributeSpec",
    "BlockbenchError",
    "BuildingBlock",
    "ChangeError",
    "ChangeOp",
    "ChangeSet",
    "ConstraintSpec",
    "Diagnostic",
    "DocEntry",
    "EffectiveBlock",
    "ElementKind",
    "ExtensionCycleError",
    "MethodSpec",
    "MethodStep",
    "Model",
    "ModelElement",
    "ModelStore",
    "NuanceSpec",
    "ParseError",
    "ParseFailure",
    "PredicateSpec",
    "RenderBindingError",
    "ResolutionError",
    "Selector",
    "UnknownBlockError",
    "ValueType",
    "VersionConflictError",
    "Workspace",
    "apply_change",
    "diagnostic_line",
    "explain",
    "instantiate",
    "layout",
    "list_blocks",
    "load_workspace",
    "parse_block",
    "parse_model",
    "reachable_set",
    "render_model",
    "render_svg",
    "resolve",
    "serialize_block",
    "serialize_model",
    "validate",
]
