from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from blockbench import load_workspace, parse_model, resolve

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "blockbench" / "fixtures"


@pytest.fixture(scope="session")
def workspace():
    return load_workspace(FIXTURES)


@pytest.fixture(scope="session")
def state_machine(workspace):
    return resolve(workspace, "StateMachine")


@pytest.fixture(scope="session")
def traffic_signal(workspace):
    return resolve(workspace, "TrafficSignal")


@pytest.fixture(scope="session")
def pedestrian_model():
    return parse_model((FIXTURES / "models" / "pedestrian_signal.dslm").read_bytes())


@pytest.fixture(scope="session")
def minimal_model():
    return parse_model((FIXTURES / "models" / "minimal_machine.dslm").read_bytes())


@pytest.fixture
def scratch_workspace(tmp_path):
    """A throwaway copy of the fixture workspace for mutation tests."""
    for f in FIXTURES.glob("*.dslbb"):
        shutil.copy(f, tmp_path)
    return tmp_path
