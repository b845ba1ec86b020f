"""Generated syntax and method documentation."""

from __future__ import annotations

from blockbench import parse_block
from blockbench.docgen import generate_docs, generate_method_doc
from blockbench.registry import EffectiveBlock


def _effective(block) -> EffectiveBlock:
    return EffectiveBlock(
        name=block.name,
        lineage=(block.name,),
        elements=block.elements,
        constraints=block.constraints,
        method=block.method,
        nuances=block.nuances,
        docs=block.docs,
    )


class TestSyntaxDocs:
    def test_header_and_table_shape(self, state_machine):
        text = generate_docs(state_machine)
        lines = text.splitlines()
        assert lines[0] == "# StateMachine syntax documentation"
        assert lines[2] == "| Syntax Element | Attribute | Description |"
        assert lines[3] == "| --- | --- | --- |"
        rows = [l for l in lines[4:] if l.startswith("|")]
        assert len(rows) == 10

    def test_rows_follow_declaration_order(self, state_machine):
        text = generate_docs(state_machine)
        rows = [l for l in text.splitlines() if l.startswith("|")][2:]
        first_cells = [r.split("|")[1].strip() for r in rows]
        attr_cells = [r.split("|")[2].strip() for r in rows]
        assert first_cells == [
            "StateMachine", "State", "", "", "Transition", "", "", "", "Trigger", "",
        ]
        assert attr_cells == [
            "", "", "name", "type", "", "source", "target", "action", "", "condition",
        ]

    def test_attribute_rows_follow_their_element(self, traffic_signal):
        text = generate_docs(traffic_signal)
        assert "Initial, Intermediate." in text  # overridden State.type text
        assert "Initial, Intermediate, Final." not in text

    def test_pipes_escaped(self):
        block = parse_block(
            b'block T\n\nelement node N\n\ndoc N "a | b"\n'
        )
        text = generate_docs(_effective(block))
        assert "a \\| b" in text

    def test_undocumented_block_has_empty_table(self):
        block = parse_block(b"block T\n\nelement node N\n")
        text = generate_docs(_effective(block))
        rows = [l for l in text.splitlines() if l.startswith("|")]
        assert len(rows) == 2  # header + separator only


class TestMethodDocs:
    def test_lists_constraints_then_steps(self, state_machine):
        text = generate_method_doc(state_machine)
        assert text.splitlines()[0] == "# StateMachine method guide"
        assert "## Constraints" in text
        assert "## Steps" in text
        assert text.index("## Constraints") < text.index("## Steps")

    def test_constraint_lines(self, state_machine):
        text = generate_method_doc(state_machine)
        assert "- **C1** (error): State {element} is not reachable from the initial state." in text

    def test_steps_numbered_with_completion(self, state_machine):
        text = generate_method_doc(state_machine)
        assert "1. **Create the state machine**." in text
        assert "5. **Validate the model**." in text
        assert "*Done when:*" in text

    def test_extension_method_doc_shows_overrides(self, traffic_signal):
        text = generate_method_doc(traffic_signal)
        assert "Define the three signal states" in text
        assert "- **C5** (error):" in text
