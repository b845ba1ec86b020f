"""Command line behavior and exit codes."""

from __future__ import annotations

import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from blockbench.cli import main
from tests.conftest import FIXTURES

PEDESTRIAN = FIXTURES / "models" / "pedestrian_signal.dslm"


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, *args, workspace=FIXTURES):
    return runner.invoke(main, [*args, "--workspace", str(workspace)])


class TestCheck:
    def test_clean_model_exits_zero(self, runner):
        result = _run(runner, "check", str(PEDESTRIAN))
        assert result.exit_code == 0
        assert result.stdout == ""

    def test_findings_print_one_line_each(self, runner, tmp_path):
        bad = tmp_path / "bad.dslm"
        bad.write_text(
            "model bad : StateMachine version 1\n\n"
            "[State: a] { type = Initial }\n"
            "[State: stray]\n"
        )
        result = _run(runner, "check", str(bad))
        assert result.exit_code == 1
        lines = result.stdout.splitlines()
        assert "error C1 [stray] State stray is not reachable from the initial state." in lines
        assert all(line.split()[0] in ("error", "warning") for line in lines)

    def test_warning_only_model_exits_zero(self, runner, tmp_path):
        # A lone initial state is reachable (it is the root) but isolated,
        # so the only finding is the N5 warning.
        warn = tmp_path / "warn.dslm"
        warn.write_text(
            "model warn : StateMachine version 1\n\n[State: a] { type = Initial }\n"
        )
        result = _run(runner, "check", str(warn))
        assert result.exit_code == 0
        assert result.stdout.splitlines() == [
            "warning N5 [a] State a has no incoming or outgoing transitions."
        ]

    def test_missing_file_exits_three(self, runner):
        result = _run(runner, "check", "/nonexistent/x.dslm")
        assert result.exit_code == 3

    def test_parse_error_exits_two(self, runner, tmp_path):
        bad = tmp_path / "broken.dslm"
        bad.write_text("model broken StateMachine version 1\n")
        result = _run(runner, "check", str(bad))
        assert result.exit_code == 2
        assert "broken.dslm:1:" in result.stderr

    def test_unknown_block_exits_two(self, runner, tmp_path):
        bad = tmp_path / "orphan.dslm"
        bad.write_text("model orphan : Ghost version 1\n")
        result = _run(runner, "check", str(bad))
        assert result.exit_code == 2

    def test_missing_workspace_exits_three(self, runner):
        result = _run(runner, "check", str(PEDESTRIAN), workspace="/nonexistent")
        assert result.exit_code == 3


class TestRender:
    def test_render_to_stdout(self, runner):
        result = _run(runner, "render", str(PEDESTRIAN), "-o", "-")
        assert result.exit_code == 0
        assert result.stdout.startswith("<svg ")
        assert result.stdout.rstrip().endswith("</svg>")

    def test_render_to_file(self, runner, tmp_path):
        out = tmp_path / "out.svg"
        result = _run(runner, "render", str(PEDESTRIAN), "-o", str(out))
        assert result.exit_code == 0
        assert out.read_text().startswith("<svg ")

    def test_render_unbindable_exits_one(self, runner, tmp_path):
        bad = tmp_path / "ghost.dslm"
        bad.write_text("model ghost : StateMachine version 1\n\n[Ghost: g]\n")
        result = _run(runner, "render", str(bad))
        assert result.exit_code == 1
        assert "cannot render" in result.stderr


class TestDocs:
    def test_docs_to_stdout(self, runner):
        result = _run(runner, "docs", "StateMachine")
        assert result.exit_code == 0
        assert result.stdout.splitlines()[0] == "# StateMachine syntax documentation"

    def test_unknown_block_exits_two(self, runner):
        result = _run(runner, "docs", "Ghost")
        assert result.exit_code == 2


class TestBlocks:
    def test_list_table(self, runner):
        result = _run(runner, "blocks", "list")
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0].split() == ["NAME", "EXTENDS", "ELEMENTS", "CONSTRAINTS", "NUANCES", "STEPS"]
        assert lines[1].split() == ["StateMachine", "-", "4", "4", "7", "5"]
        assert lines[2].split() == ["TrafficSignal", "StateMachine", "4", "5", "10", "5"]

    def test_load_issues_on_stderr(self, runner, tmp_path):
        shutil.copy(FIXTURES / "state_machine.dslbb", tmp_path)
        (tmp_path / "junk.dslbb").write_text("junk\n")
        result = _run(runner, "blocks", "list", workspace=tmp_path)
        assert result.exit_code == 0
        assert "issue:" in result.stderr


class TestNew:
    def test_new_creates_model_file(self, runner, tmp_path, scratch_workspace):
        result = _run(runner, "new", "TrafficSignal", "crossing", workspace=scratch_workspace)
        assert result.exit_code == 0
        path = scratch_workspace / "models" / "crossing.dslm"
        assert path.is_file()
        assert str(path) in result.stdout
        assert "[State: Go]" in path.read_text()

    def test_new_duplicate_exits_three(self, runner, scratch_workspace):
        _run(runner, "new", "TrafficSignal", "crossing", workspace=scratch_workspace)
        result = _run(runner, "new", "TrafficSignal", "crossing", workspace=scratch_workspace)
        assert result.exit_code == 3

    def test_new_unknown_block_exits_two(self, runner, scratch_workspace):
        result = _run(runner, "new", "Ghost", "m", workspace=scratch_workspace)
        assert result.exit_code == 2

    def test_workspace_env_var(self, runner, scratch_workspace):
        result = runner.invoke(
            main,
            ["new", "StateMachine", "viaenv"],
            env={"BLOCKBENCH_WORKSPACE": str(scratch_workspace)},
        )
        assert result.exit_code == 0
        assert (scratch_workspace / "models" / "viaenv.dslm").is_file()
