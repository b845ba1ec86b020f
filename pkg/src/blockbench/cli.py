"""Command-line surface.

Exit codes are part of the contract: 0 clean, 1 error-severity diagnostics,
2 usage or parse problems, 3 I/O problems. Output is plain text with no
color codes so scripted use stays stable.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .core import BlockbenchError, Model
from .docgen import generate_docs
from .parsing import ParseFailure, parse_model
from .registry import (
    EffectiveBlock,
    Workspace,
    list_blocks,
    load_workspace,
    resolve,
)
from .rendering import RenderBindingError, render_model
from .store import ModelExistsError, ModelStore
from .validation import diagnostic_line, validate

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _fail(code: int, message: str) -> SystemExit:
    click.echo(message, err=True)
    return SystemExit(code)


workspace_option = click.option(
    "--workspace",
    "-w",
    "workspace_dir",
    envvar="BLOCKBENCH_WORKSPACE",
    default=".",
    help="Directory holding .dslbb files (defaults to the current directory).",
)


@click.group()
def main() -> None:
    """Workbench for graphical DSL building blocks."""


def _load_workspace(workspace_dir: str) -> Workspace:
    path = Path(workspace_dir)
    if not path.is_dir():
        raise _fail(EXIT_IO, f"workspace directory does not exist: {path}")
    return load_workspace(path)


def _resolve_block(workspace: Workspace, name: str) -> EffectiveBlock:
    try:
        return resolve(workspace, name)
    except BlockbenchError as exc:
        raise _fail(EXIT_USAGE, str(exc))


def _read_model(model_path: str) -> Model:
    path = Path(model_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise _fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")
    try:
        return parse_model(data)
    except ParseFailure as exc:
        for error in exc.errors:
            click.echo(f"{path}:{error.render()}", err=True)
        raise SystemExit(EXIT_USAGE)


@main.command()
@click.argument("model_path")
@workspace_option
def check(model_path: str, workspace_dir: str) -> None:
    """Validate a model file and print its diagnostics."""
    model = _read_model(model_path)
    workspace = _load_workspace(workspace_dir)
    block = _resolve_block(workspace, model.block_name)
    diagnostics = validate(model, block)
    for diag in diagnostics:
        click.echo(diagnostic_line(diag))
    if any(diag.severity == "error" for diag in diagnostics):
        raise SystemExit(EXIT_DIAGNOSTICS)


@main.command()
@click.argument("model_path")
@click.option("--output", "-o", default="-", help="Output file, or - for stdout.")
@workspace_option
def render(model_path: str, output: str, workspace_dir: str) -> None:
    """Render a model to SVG, violation markers included."""
    model = _read_model(model_path)
    workspace = _load_workspace(workspace_dir)
    block = _resolve_block(workspace, model.block_name)
    try:
        svg = render_model(model, block)
    except RenderBindingError as exc:
        raise _fail(EXIT_DIAGNOSTICS, f"cannot render: {exc}")
    if output == "-":
        sys.stdout.write(svg)
        sys.stdout.flush()
    else:
        try:
            Path(output).write_text(svg, encoding="utf-8")
        except OSError as exc:
            raise _fail(EXIT_IO, f"cannot write {output}: {exc.strerror or exc}")


@main.command()
@click.argument("block_name")
@click.option("--output", "-o", default="-", help="Output file, or - for stdout.")
@workspace_option
def docs(block_name: str, output: str, workspace_dir: str) -> None:
    """Print a block's structured syntax documentation as markdown."""
    workspace = _load_workspace(workspace_dir)
    block = _resolve_block(workspace, block_name)
    text = generate_docs(block)
    if output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _fail(EXIT_IO, f"cannot write {output}: {exc.strerror or exc}")


@main.group()
def blocks() -> None:
    """Inspect the blocks of a workspace."""


@blocks.command(name="list")
@workspace_option
def blocks_list(workspace_dir: str) -> None:
    """List blocks with their effective entry counts."""
    workspace = _load_workspace(workspace_dir)
    rows = [("NAME", "EXTENDS", "ELEMENTS", "CONSTRAINTS", "NUANCES", "STEPS")]
    for summary in list_blocks(workspace):
        rows.append(
            (
                summary.name,
                summary.parent or "-",
                str(summary.elements),
                str(summary.constraints),
                str(summary.nuances),
                str(summary.steps),
            )
        )
    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    for row in rows:
        click.echo("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    for issue in workspace.load_issues:
        click.echo(f"issue: {issue.render()}", err=True)


@main.command()
@click.argument("block_name")
@click.argument("model_name")
@workspace_option
def new(block_name: str, model_name: str, workspace_dir: str) -> None:
    """Create a model of a block, applying its auto-create nuances."""
    workspace = _load_workspace(workspace_dir)
    block = _resolve_block(workspace, block_name)
    store = ModelStore(workspace.root_dir)
    try:
        store.create(block, model_name)
    except ModelExistsError as exc:
        raise _fail(EXIT_IO, str(exc))
    except BlockbenchError as exc:
        raise _fail(EXIT_USAGE, str(exc))
    click.echo(str(store.path_of(model_name)))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--cors-origin", default=None, help="Origin allowed to call the API.")
@workspace_option
def serve(host: str, port: int, cors_origin: str | None, workspace_dir: str) -> None:
    """Serve the HTTP API over the workspace."""
    path = Path(workspace_dir)
    if not path.is_dir():
        raise _fail(EXIT_IO, f"workspace directory does not exist: {path}")
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(path, cors_origin=cors_origin), host=host, port=port)
