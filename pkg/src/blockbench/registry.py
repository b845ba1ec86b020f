"""Workspace loading and extension resolution.

A workspace is a directory of .dslbb files. Each block may extend one other
block; resolving a name folds the whole extension chain into a single
effective block. Entries are merged by id: the most-derived definition wins
and keeps the position of the entry it overrides, while entries new in a
child are appended after its parent's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    BlockbenchError,
    BuildingBlock,
    ConstraintSpec,
    DefinitionIssue,
    DocEntry,
    ElementKind,
    MethodSpec,
    MethodStep,
    NuanceSpec,
    check_block,
    check_definitions,
)
from .parsing import ParseFailure, parse_block


class UnknownBlockError(BlockbenchError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown block '{name}'")


class ExtensionCycleError(BlockbenchError):
    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("extension cycle: " + " -> ".join(cycle))


class ResolutionError(BlockbenchError):
    """An extension chain folds into a definition that fails static checks."""

    def __init__(self, name: str, issues: list[DefinitionIssue]):
        self.name = name
        self.issues = list(issues)
        head = "; ".join(i.render() for i in issues[:3])
        super().__init__(f"block '{name}' does not resolve cleanly: {head}")


@dataclass(frozen=True)
class Workspace:
    root_dir: Path
    blocks: dict[str, BuildingBlock] = field(default_factory=dict)
    load_issues: tuple[DefinitionIssue, ...] = ()


@dataclass(frozen=True)
class EffectiveBlock:
    """A block with its whole extension chain folded in."""

    name: str
    lineage: tuple[str, ...]
    elements: tuple[ElementKind, ...] = ()
    constraints: tuple[ConstraintSpec, ...] = ()
    method: MethodSpec = MethodSpec()
    nuances: tuple[NuanceSpec, ...] = ()
    docs: tuple[DocEntry, ...] = ()

    def nuance(self, nuance_id: str) -> NuanceSpec | None:
        for n in self.nuances:
            if n.id == nuance_id:
                return n
        return None


def load_workspace(root_dir: str | Path, recursive: bool = False) -> Workspace:
    """Parse every .dslbb file under root_dir (non-recursive by default).

    Parse errors and static check issues land in load_issues; files that do
    parse are registered even when they carry issues elsewhere.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise BlockbenchError(f"workspace directory does not exist: {root}")
    blocks: dict[str, BuildingBlock] = {}
    issues: list[DefinitionIssue] = []
    pattern = "**/*.dslbb" if recursive else "*.dslbb"
    for path in sorted(root.glob(pattern)):
        rel = str(path.relative_to(root))
        try:
            text = path.read_bytes()
        except OSError as exc:
            issues.append(DefinitionIssue(rel, "file", f"unreadable: {exc}"))
            continue
        try:
            block = parse_block(text)
        except ParseFailure as exc:
            issues.extend(
                DefinitionIssue(rel, f"line {e.span.line}", e.message) for e in exc.errors
            )
            continue
        if block.name in blocks:
            issues.append(DefinitionIssue(rel, "block", f"duplicate block name '{block.name}'"))
            continue
        issues.extend(check_block(block))
        blocks[block.name] = block
    for block in blocks.values():
        if block.extends and block.extends not in blocks:
            issues.append(
                DefinitionIssue(block.name, "extends", f"extends unknown block '{block.extends}'")
            )
    return Workspace(root_dir=root, blocks=blocks, load_issues=tuple(issues))


def _lineage(workspace: Workspace, name: str) -> list[BuildingBlock]:
    """Extension chain for name, root first."""
    chain: list[BuildingBlock] = []
    seen: list[str] = []
    current: str | None = name
    while current is not None:
        if current in seen:
            raise ExtensionCycleError(seen[seen.index(current):] + [current])
        block = workspace.blocks.get(current)
        if block is None:
            raise UnknownBlockError(current)
        seen.append(current)
        chain.append(block)
        current = block.extends
    chain.reverse()
    return chain


def _merge(existing: list, incoming, key) -> None:
    """Override-by-id merge: replace in place, or append when the id is new."""
    for entry in incoming:
        for idx, present in enumerate(existing):
            if key(present) == key(entry):
                existing[idx] = entry
                break
        else:
            existing.append(entry)


def resolve(workspace: Workspace, name: str) -> EffectiveBlock:
    """Fold the extension chain of name into one effective block.

    The merged definition is re-checked strictly; a child that references
    kinds nowhere in its lineage fails here rather than at use time.
    """
    chain = _lineage(workspace, name)
    elements: list[ElementKind] = []
    constraints: list[ConstraintSpec] = []
    steps: list[MethodStep] = []
    nuances: list[NuanceSpec] = []
    docs: list[DocEntry] = []
    for block in chain:
        _merge(elements, block.elements, key=lambda e: e.name)
        _merge(constraints, block.constraints, key=lambda c: c.id)
        _merge(steps, block.method.steps, key=lambda s: s.id)
        _merge(nuances, block.nuances, key=lambda n: n.id)
        _merge(docs, block.docs, key=lambda d: (d.element, d.attribute))
    effective = EffectiveBlock(
        name=name,
        lineage=tuple(block.name for block in chain),
        elements=tuple(elements),
        constraints=tuple(constraints),
        method=MethodSpec(tuple(steps)),
        nuances=tuple(nuances),
        docs=tuple(docs),
    )
    issues = check_definitions(
        name,
        effective.elements,
        effective.constraints,
        effective.nuances,
        effective.method,
        effective.docs,
        strict=True,
    )
    if issues:
        raise ResolutionError(name, issues)
    return effective


@dataclass(frozen=True)
class BlockSummary:
    name: str
    parent: str | None
    elements: int
    constraints: int
    nuances: int
    steps: int


def list_blocks(workspace: Workspace) -> list[BlockSummary]:
    """Summaries sorted by name; counts come from the effective block when it
    resolves, otherwise from the raw definition."""
    out: list[BlockSummary] = []
    for name in sorted(workspace.blocks):
        block = workspace.blocks[name]
        try:
            eff = resolve(workspace, name)
            counts = (len(eff.elements), len(eff.constraints), len(eff.nuances), len(eff.method.steps))
        except BlockbenchError:
            counts = (
                len(block.elements),
                len(block.constraints),
                len(block.nuances),
                len(block.method.steps),
            )
        out.append(BlockSummary(name, block.extends, *counts))
    return out
