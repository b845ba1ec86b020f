"""Acceptance gate: one test (and one pass/fail line under -v) per criterion.

Each test carries its runtime budget as an assertion so a regression in
speed fails loudly rather than silently degrading.
"""

from __future__ import annotations

import dataclasses
import itertools
import random
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from blockbench import (
    ParseFailure,
    parse_block,
    parse_model,
    render_model,
    resolve,
    serialize_block,
    serialize_model,
    validate,
)
from blockbench.cli import main as cli_main
from blockbench.core import ModelElement
from blockbench.method import PredicateReport, advance, start_session
from blockbench.service import create_app
from blockbench.store import ChangeOp, ChangeSet, apply_change, instantiate
from blockbench.validation import reachable_set
from tests.conftest import FIXTURES

# The ten documentation strings the generated table must reproduce verbatim.
TABLE_DOCS = [
    "A finite state machine with a fixed number of [State]s and [Transition]s.",
    "Representation of information of a system at a given point.",
    "Name of the [State].",
    "Type of a [State]: Initial, Intermediate, Final.",
    "A path between two [State]s based on an action.",
    "A [Transition] starts at this [State].",
    "The [State] where the [Transition] ends.",
    "The [Trigger] that switches the [Transition] from a source to a target [State].",
    "A logical condition for a [Transition] running for a definite period of time.",
    "A string holding the condition requirement.",
]


def _cli(*args, workspace=FIXTURES):
    return CliRunner().invoke(cli_main, [*args, "--workspace", str(workspace)])


def test_criterion_1_state_machine_fixture_and_docs(state_machine):
    started = time.monotonic()
    assert [e.name for e in state_machine.elements] == [
        "StateMachine", "State", "Transition", "Trigger",
    ]
    assert [c.id for c in state_machine.constraints] == ["C1", "C2", "C3", "C4"]
    assert [n.id for n in state_machine.nuances] == [f"N{i}" for i in range(1, 8)]
    assert len(state_machine.docs) == 10

    result = _cli("docs", "StateMachine")
    assert result.exit_code == 0
    for sentence in TABLE_DOCS:
        assert sentence in result.stdout, sentence
    assert time.monotonic() - started < 1.0


def test_criterion_2_traffic_signal_resolution_and_validation(
    traffic_signal, pedestrian_model
):
    started = time.monotonic()
    assert [c.id for c in traffic_signal.constraints] == ["C1", "C2", "C3", "C4", "C5"]
    assert [n.id for n in traffic_signal.nuances] == [f"N{i}" for i in range(1, 11)]
    n2 = traffic_signal.nuance("N2")
    assert n2.params.get("order") == "Stop, Slow, Go"  # overridden, not inherited

    transitions = sorted(
        (el.attrs["source"], el.attrs["target"])
        for el in pedestrian_model.elements
        if el.kind == "Transition"
    )
    assert transitions == [("Go", "Slow"), ("Slow", "Stop"), ("Stop", "Go")]
    triggers = {
        el.attrs["condition"] for el in pedestrian_model.elements if el.kind == "Trigger"
    }
    assert triggers == {"Wait 30 seconds", "Wait 5 seconds", "Wait 35 seconds"}
    assert validate(pedestrian_model, traffic_signal) == []

    with_final = dataclasses.replace(
        pedestrian_model,
        elements=pedestrian_model.elements
        + (ModelElement(name="End", kind="State", attrs={"type": "Final"}),),
    )
    diags = validate(with_final, traffic_signal)
    assert len([d for d in diags if d.code == "C5"]) == 1
    assert time.monotonic() - started < 1.0


def test_criterion_3_reachability_matches_brute_force():
    started = time.monotonic()
    checked = 0
    for n in range(1, 5):
        nodes = [f"n{i}" for i in range(n)]
        pairs = [(s, t) for s in nodes for t in nodes if s != t]
        for bits in range(2 ** len(pairs)):
            chosen = {p for i, p in enumerate(pairs) if bits >> i & 1}
            elements = [
                ModelElement(
                    name=node,
                    kind="N",
                    attrs={"root": "yes" if node == "n0" else "no"},
                )
                for node in nodes
            ]
            elements += [
                ModelElement(name=f"e{i}", kind="E", attrs={"source": s, "target": t})
                for i, (s, t) in enumerate(sorted(chosen))
            ]
            model = dataclasses.replace(
                parse_model(b"model m : B version 1\n"), elements=tuple(elements)
            )
            # Oracle: enumerate every simple path that starts at the root.
            expected = {"n0"}
            for k in range(2, n + 1):
                for path in itertools.permutations(nodes, k):
                    if path[0] != "n0":
                        continue
                    if all((path[i], path[i + 1]) in chosen for i in range(k - 1)):
                        expected.add(path[-1])
            assert reachable_set(model, "N[root=yes]") == expected, sorted(chosen)
            checked += 1
    assert checked == 2**0 + 2**2 + 2**6 + 2**12
    assert time.monotonic() - started < 10.0


def test_criterion_4_rendering(traffic_signal, pedestrian_model):
    import re

    started = time.monotonic()
    svg = render_model(pedestrian_model, traffic_signal)
    assert svg.count("<circle") == 3
    circles = re.findall(r'<circle cx="[^"]*" cy="([^"]*)"[^>]*fill="([^"]*)"', svg)
    y_by_fill = {fill: float(cy) for cy, fill in circles}
    assert set(y_by_fill) == {"red", "yellow", "green"}
    assert y_by_fill["red"] < y_by_fill["yellow"] < y_by_fill["green"]

    without_trigger = dataclasses.replace(
        pedestrian_model,
        elements=tuple(
            dataclasses.replace(
                el, attrs={k: v for k, v in el.attrs.items() if k != "action"}
            )
            if el.kind == "Transition" and el.name == "2"
            else el
            for el in pedestrian_model.elements
        ),
    )
    broken_svg = render_model(without_trigger, traffic_signal)
    assert 'stroke="red"' in broken_svg
    assert ">!</text>" in broken_svg

    with_isolated = dataclasses.replace(
        pedestrian_model,
        elements=pedestrian_model.elements
        + (ModelElement(name="Idle", kind="State", attrs={}),),
    )
    isolated_svg = render_model(with_isolated, traffic_signal)
    assert ">!</text>" in isolated_svg

    assert render_model(pedestrian_model, traffic_signal) == svg
    assert time.monotonic() - started < 1.0


def test_criterion_5_instantiation(state_machine, traffic_signal):
    started = time.monotonic()
    machine = instantiate(state_machine, "m")
    assert len(machine.elements) == 1
    seed = machine.elements[0]
    assert (seed.kind, seed.attrs["type"]) == ("State", "Initial")

    signal = instantiate(traffic_signal, "m")
    assert [(e.kind, e.name, e.attrs["type"]) for e in signal.elements] == [
        ("State", "Go", "Initial")
    ]
    assert time.monotonic() - started < 1.0


def test_criterion_6_round_trips_and_fuzz(workspace):
    started = time.monotonic()
    block_paths = sorted(FIXTURES.glob("*.dslbb"))
    model_paths = sorted((FIXTURES / "models").glob("*.dslm"))
    assert len(block_paths) == 2 and len(model_paths) == 3

    corpus = []
    for path in block_paths:
        raw = path.read_bytes()
        block = parse_block(raw)
        assert parse_block(serialize_block(block).encode()) == block
        corpus.append((raw, parse_block))
    for path in model_paths:
        raw = path.read_bytes()
        model = parse_model(raw)
        assert parse_model(serialize_model(model).encode()) == model
        corpus.append((raw, parse_model))

    rng = random.Random(20260816)
    for _ in range(10_000):
        raw, parser = corpus[rng.randrange(len(corpus))]
        data = bytearray(raw)
        for _ in range(rng.randint(1, 4)):
            choice = rng.random()
            pos = rng.randrange(len(data)) if data else 0
            if choice < 0.6 and data:
                data[pos] = rng.randrange(256)
            elif choice < 0.8:
                data.insert(pos, rng.randrange(256))
            elif data:
                del data[pos]
        try:
            parser(bytes(data))
        except ParseFailure:
            pass  # rejected inputs are fine; crashes are not
    assert time.monotonic() - started < 30.0


def test_criterion_7_extension_isolation(workspace):
    baseline = parse_block((FIXTURES / "state_machine.dslbb").read_bytes())
    before = resolve(workspace, "StateMachine")
    resolve(workspace, "TrafficSignal")
    after = resolve(workspace, "StateMachine")
    assert after == before
    assert after.elements == baseline.elements
    assert after.constraints == baseline.constraints
    assert after.nuances == baseline.nuances
    assert after.method == baseline.method
    assert after.docs == baseline.docs


def test_criterion_8_method_session_discipline(state_machine):
    def grow(model, *ops):
        return apply_change(
            model, ChangeSet(base_version=model.version, ops=tuple(ops)), state_machine
        )

    model = instantiate(state_machine, "m")
    session = start_session(model, state_machine)
    walked = []

    def step_forward(current_model):
        nonlocal session
        outcome = advance(session, current_model, state_machine)
        assert not isinstance(outcome, PredicateReport)
        done_before = sum(1 for s in session.step_states if s.status == "done")
        done_after = sum(1 for s in outcome.step_states if s.status == "done")
        assert done_after == done_before + 1  # exactly one step at a time
        walked.append(session.current_step_id())
        session = outcome

    def blocked(current_model, step_id):
        outcome = advance(session, current_model, state_machine)
        assert isinstance(outcome, PredicateReport)
        assert outcome.step_id == step_id
        assert not outcome.satisfied

    step_forward(model)  # s1: the seeded state satisfies it
    blocked(model, "s2")  # one state is not two
    model = grow(model, ChangeOp(op="add-element", kind="State", name="Work"))
    step_forward(model)  # s2
    blocked(model, "s3")  # no transition yet
    model = grow(
        model,
        ChangeOp(op="add-edge", kind="Transition", name="t", source="Start", target="Work"),
    )
    step_forward(model)  # s3
    blocked(model, "s4")  # transition has no trigger
    model = grow(
        model,
        ChangeOp(
            op="add-element",
            kind="Trigger",
            name="go",
            attrs={"condition": "gibberish"},
        ),
        ChangeOp(op="set-attr", kind="Transition", name="t", attr="action", value="go"),
    )
    step_forward(model)  # s4

    # s5 gates on model-valid: the bad trigger must block it with exactly
    # the error-severity findings validate reports.
    outcome = advance(session, model, state_machine)
    assert isinstance(outcome, PredicateReport)
    assert outcome.step_id == "s5"
    expected_errors = [d for d in validate(model, state_machine) if d.severity == "error"]
    assert list(outcome.diagnostics) == expected_errors

    model = grow(
        model,
        ChangeOp(
            op="set-attr",
            kind="Trigger",
            name="go",
            attr="condition",
            value="Wait 2 seconds",
        ),
    )
    assert [d for d in validate(model, state_machine) if d.severity == "error"] == []
    step_forward(model)  # s5 passes once validate is clean
    assert session.finished()
    assert walked == ["s1", "s2", "s3", "s4", "s5"]


def test_criterion_9_cli_service_parity(scratch_workspace):
    app = create_app(scratch_workspace)
    with TestClient(app) as client:
        client.post("/models", json={"block": "TrafficSignal", "name": "demo"})
        client.patch(
            "/models/demo",
            json={
                "baseVersion": 1,
                "ops": [
                    {"op": "add-element", "kind": "State", "name": "Slow"},
                    {
                        "op": "add-edge",
                        "kind": "Transition",
                        "name": "1",
                        "source": "Go",
                        "target": "Slow",
                    },
                ],
            },
        )
        model_path = scratch_workspace / "models" / "demo.dslm"
        assert model_path.is_file()

        http_validate = client.post("/models/demo/validate").json()["text"]
        cli_validate = _cli("check", str(model_path), workspace=scratch_workspace)
        assert http_validate != ""  # the missing trigger guarantees findings
        assert cli_validate.stdout_bytes == http_validate.encode()

        http_svg = client.get("/models/demo/render.svg").content
        cli_svg = _cli("render", str(model_path), "-o", "-", workspace=scratch_workspace)
        assert cli_svg.stdout_bytes == http_svg
