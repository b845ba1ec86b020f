"""Markdown documentation generated from an effective block.

Two documents: the syntax table (one row per documented element or
attribute, descriptions verbatim) and the method guide (constraints first,
then the numbered steps with their completion criteria in plain words).
"""

from __future__ import annotations

from .method import predicate_text
from .registry import EffectiveBlock


def _cell(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def generate_docs(block: EffectiveBlock) -> str:
    """The structured syntax documentation as a 3-column markdown table.

    Element rows come before their attribute rows; elements follow their
    declaration order in the block.
    """
    lines = [
        f"# {block.name} syntax documentation",
        "",
        "| Syntax Element | Attribute | Description |",
        "| --- | --- | --- |",
    ]
    declared = [el.name for el in block.elements]
    order = {name: idx for idx, name in enumerate(declared)}
    docs = sorted(
        enumerate(block.docs),
        key=lambda pair: (
            order.get(pair[1].element, len(order)),
            pair[1].attribute is not None,
            pair[0],
        ),
    )
    for _, entry in docs:
        element_cell = _cell(entry.element) if entry.attribute is None else ""
        attr_cell = _cell(entry.attribute) if entry.attribute is not None else ""
        lines.append(f"| {element_cell} | {attr_cell} | {_cell(entry.description)} |")
    return "\n".join(lines) + "\n"


def generate_method_doc(block: EffectiveBlock) -> str:
    """The modelling guide: the constraint list, then the methodical steps."""
    lines = [f"# {block.name} method guide", ""]
    if block.constraints:
        lines.append("## Constraints")
        lines.append("")
        for c in block.constraints:
            lines.append(f"- **{c.id}** ({c.severity}): {c.message}")
        lines.append("")
    lines.append("## Steps")
    lines.append("")
    for idx, step in enumerate(block.method.steps, start=1):
        line = f"{idx}. **{step.title}**."
        if step.description:
            line += f" {step.description}"
        line += f" *Done when:* {predicate_text(step.completion)}."
        lines.append(line)
    return "\n".join(lines) + "\n"
