"""Constraint evaluation, binding, and reachability."""

from __future__ import annotations

import dataclasses
import itertools

from blockbench import parse_model, validate
from blockbench.core import ModelElement, Selector
from blockbench.validation import (
    bound_elements,
    diagnostic_line,
    explain,
    reachable_set,
)


def _model(body: str, block: str = "StateMachine") -> object:
    return parse_model(f"model m : {block} version 1\n\n{body}".encode())


def _codes(diags):
    return [d.code for d in diags]


class TestBinding:
    def test_unknown_kind_is_fatal(self, state_machine):
        model = _model("[Ghost: g]\n")
        diags = validate(model, state_machine)
        assert len(diags) == 1
        assert diags[0].code == "binding"
        assert diags[0].targets == ()
        assert "Ghost" in diags[0].message

    def test_dangling_endpoint_is_fatal(self, state_machine):
        model = _model("[State: a] { type = Initial }\n[Transition: t] a -> ghost\n")
        diags = validate(model, state_machine)
        assert _codes(diags) == ["binding"]

    def test_source_on_non_edge_is_fatal(self, state_machine):
        model = _model("[Trigger: t] a -> b { condition = \"x\" }\n")
        diags = validate(model, state_machine)
        assert _codes(diags) == ["binding"]

    def test_dangling_element_ref_is_fatal(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t] a -> b { action = ghost }\n"
        )
        diags = validate(model, state_machine)
        assert _codes(diags) == ["binding"]

    def test_fatal_skips_constraint_evaluation(self, state_machine):
        # An unbindable model must not also report constraint findings.
        model = _model("[Ghost: g]\n[State: lonely]\n")
        diags = validate(model, state_machine)
        assert _codes(diags) == ["binding"]

    def test_missing_required_attr_is_soft(self, state_machine):
        model = _model("[Trigger: t]\n")  # condition is optional, so build one that isn't
        # State.type is required but has a default, so craft a missing case:
        # Trigger.condition is optional; use a model with an undeclared attr instead.
        model = _model('[State: a] { type = Initial, zap = 1 }\n')
        diags = validate(model, state_machine)
        binding = [d for d in diags if d.code == "binding"]
        assert len(binding) == 1
        assert binding[0].targets == ("a",)
        assert "zap" in binding[0].message

    def test_type_mismatch_is_soft(self, state_machine):
        model = _model('[Trigger: t] { condition = 5 }\n')
        diags = validate(model, state_machine)
        binding = [d for d in diags if d.code == "binding"]
        assert len(binding) == 1
        assert binding[0].severity == "error"

    def test_defaults_visible_to_constraints(self, state_machine):
        # b omits type; the default Intermediate must flow into C3 evaluation.
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t] a -> b\n"
        )
        bound = bound_elements(model, state_machine)
        by_name = {el.name: el for el in bound}
        assert by_name["b"].attrs["type"] == "Intermediate"

    def test_bound_elements_on_clean_model(self, traffic_signal, pedestrian_model):
        bound = bound_elements(pedestrian_model, traffic_signal)
        assert len(bound) == len(pedestrian_model.elements)


class TestReachability:
    def test_roots_included(self, state_machine):
        model = _model("[State: a] { type = Initial }\n")
        assert reachable_set(model, "State[type=Initial]") == {"a"}

    def test_follows_edges(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n[State: c]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> c\n"
        )
        assert reachable_set(model, "State[type=Initial]") == {"a", "b", "c"}

    def test_direction_matters(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] b -> a\n"
        )
        assert reachable_set(model, "State[type=Initial]") == {"a"}

    def test_selector_object_accepted(self, state_machine):
        model = _model("[State: a] { type = Initial }\n")
        assert reachable_set(model, Selector("State", "type", "Initial")) == {"a"}

    def test_via_filter(self, state_machine):
        # Only Transition edges count; a hypothetical other edge kind is ignored.
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
        )
        assert reachable_set(model, "State[type=Initial]", via="Transition") == {"a", "b"}
        assert reachable_set(model, "State[type=Initial]", via="Other") == {"a"}

    def test_brute_force_oracle_three_nodes(self):
        # Oracle: path enumeration over every edge subset of a 3-node digraph.
        nodes = ["n0", "n1", "n2"]
        pairs = [(s, t) for s in nodes for t in nodes if s != t]
        for bits in range(2 ** len(pairs)):
            chosen = [p for i, p in enumerate(pairs) if bits >> i & 1]
            elements = [ModelElement(name=n, kind="N", attrs={"root": "yes" if n == "n0" else "no"}) for n in nodes]
            elements += [
                ModelElement(name=f"e{i}", kind="E", attrs={"source": s, "target": t})
                for i, (s, t) in enumerate(chosen)
            ]
            model = dataclasses.replace(
                parse_model(b"model m : B version 1\n"), elements=tuple(elements)
            )
            expected = {"n0"}
            for k in range(1, len(nodes) + 1):
                for path in itertools.permutations(nodes, k):
                    if path[0] != "n0":
                        continue
                    if all((path[i], path[i + 1]) in chosen for i in range(len(path) - 1)):
                        expected.add(path[-1])
            assert reachable_set(model, "N[root=yes]") == expected, chosen


class TestConstraints:
    def test_clean_fixture_has_no_findings(self, traffic_signal, pedestrian_model):
        assert validate(pedestrian_model, traffic_signal) == []

    def test_unreachable_state(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n[State: c]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] c -> b\n"
        )
        diags = validate(model, state_machine)
        c1 = [d for d in diags if d.code == "C1"]
        assert [d.targets for d in c1] == [("c",)]
        assert c1[0].message == "State c is not reachable from the initial state."

    def test_reachability_only_checks_root_kind(self, state_machine):
        # A StateMachine node never joins the transition graph and is not flagged.
        model = _model(
            "[StateMachine: main]\n"
            "[State: a] { type = Initial }\n"
        )
        assert all(d.code != "C1" for d in validate(model, state_machine))

    def test_parallel_edges(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] a -> b\n"
        )
        diags = validate(model, state_machine)
        c2 = [d for d in diags if d.code == "C2"]
        assert len(c2) == 1
        assert c2[0].targets == ("t1", "t2")

    def test_opposite_directions_not_parallel(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> a\n"
        )
        assert all(d.code != "C2" for d in validate(model, state_machine))

    def test_initial_with_two_incoming(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n[State: c]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> c\n"
            "[Transition: t3] b -> a\n"
            "[Transition: t4] c -> a\n"
        )
        diags = validate(model, state_machine)
        c3 = [d for d in diags if d.code == "C3"]
        assert [d.targets for d in c3] == [("a",)]

    def test_initial_single_incoming_from_intermediate_ok(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> a\n"
        )
        assert all(d.code != "C3" for d in validate(model, state_machine))

    def test_initial_incoming_from_final_counterpart_mismatch(self, state_machine):
        # One incoming edge is within the bound, but it must come from an
        # intermediate state; a final source violates the counterpart clause.
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b] { type = Final }\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> a\n"
        )
        diags = validate(model, state_machine)
        c3 = [d.targets for d in diags if d.code == "C3"]
        assert ("a",) in c3  # bad incoming source
        assert ("b",) in c3  # final state has outgoing

    def test_final_with_outgoing(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b] { type = Final }\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] b -> a\n"
        )
        diags = validate(model, state_machine)
        assert any(d.code == "C3" and d.targets == ("b",) for d in diags)

    def test_duration_pattern(self, state_machine):
        model = _model('[Trigger: t] { condition = "Wait 5 seconds" }\n')
        assert all(d.code != "C4" for d in validate(model, state_machine))

    def test_duration_rejects_prose(self, state_machine):
        model = _model('[Trigger: t] { condition = "soon" }\n')
        diags = validate(model, state_machine)
        assert any(d.code == "C4" and d.targets == ("t",) for d in diags)

    def test_duration_rejects_zero(self, state_machine):
        # "Wait 0 seconds" matches the pattern but is not a positive duration.
        model = _model('[Trigger: t] { condition = "Wait 0 seconds" }\n')
        diags = validate(model, state_machine)
        assert any(d.code == "C4" for d in diags)

    def test_duration_accepts_fractions(self, state_machine):
        model = _model('[Trigger: t] { condition = "Wait 2.5 seconds" }\n')
        assert all(d.code != "C4" for d in validate(model, state_machine))

    def test_duration_missing_attr_violates(self, state_machine):
        model = _model("[Trigger: t]\n")
        diags = validate(model, state_machine)
        assert any(d.code == "C4" and d.targets == ("t",) for d in diags)

    def test_forbid_element_value(self, traffic_signal):
        model = _model(
            "[State: Go] { type = Initial }\n"
            "[State: End] { type = Final }\n"
            "[Transition: t1] Go -> End\n",
            block="TrafficSignal",
        )
        diags = validate(model, traffic_signal)
        c5 = [d for d in diags if d.code == "C5"]
        assert len(c5) == 1
        assert c5[0].targets == ("End",)

    def test_nuance_isolated_marker(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[State: lonely]\n"
            "[Transition: t1] a -> b\n"
        )
        diags = validate(model, state_machine)
        n5 = [d for d in diags if d.code == "N5"]
        assert [d.targets for d in n5] == [("lonely",)]
        assert n5[0].severity == "warning"
        assert n5[0].nuance_marker == "N5"

    def test_nuance_missing_trigger_marker(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
        )
        diags = validate(model, state_machine)
        n6 = [d for d in diags if d.code == "N6"]
        assert [d.targets for d in n6] == [("t1",)]
        assert n6[0].severity == "error"

    def test_diagnostics_sorted_by_code_then_target(self, state_machine):
        model = _model(
            "[State: z]\n"
            "[State: a]\n"
        )
        diags = validate(model, state_machine)
        keys = [(d.code, d.targets[0] if d.targets else "") for d in diags]
        assert keys == sorted(keys)


class TestPresentation:
    def test_diagnostic_line_shape(self, state_machine):
        model = _model("[State: a] { type = Initial }\n[State: lonely]\n")
        lines = [diagnostic_line(d) for d in validate(model, state_machine)]
        assert "warning N5 [lonely] State lonely has no incoming or outgoing transitions." in lines

    def test_multi_target_join(self, state_machine):
        model = _model(
            "[State: a] { type = Initial }\n"
            "[State: b]\n"
            "[Transition: t1] a -> b\n"
            "[Transition: t2] a -> b\n"
        )
        lines = [diagnostic_line(d) for d in validate(model, state_machine) if d.code == "C2"]
        assert lines[0].startswith("error C2 [t1, t2] ")

    def test_explain_appends_reason(self, state_machine):
        model = _model("[State: a] { type = Initial }\n[State: lonely]\n")
        n5 = [d for d in validate(model, state_machine) if d.code == "N5"][0]
        text = explain(n5, state_machine)
        assert text.startswith(n5.message)
        assert " Reason: " in text
        assert state_machine.nuance("N5").reason in text

    def test_explain_without_marker_is_plain_message(self, state_machine):
        model = _model("[State: a] { type = Initial }\n[State: b]\n")
        c1 = [d for d in validate(model, state_machine) if d.code == "C1"][0]
        assert explain(c1, state_machine) == c1.message
