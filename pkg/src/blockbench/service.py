"""HTTP/JSON API over a workspace.

Thin adapters over the registry, store, validator, renderer, docgen, and
method engine. JSON field names are camelCase mirrors of the domain types.
Errors share one envelope: {status, code, message, details?}.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .core import AttrValue, BlockbenchError, Model, ModelElement
from .docgen import generate_docs, generate_method_doc
from .method import (
    PredicateReport,
    Session,
    SessionFinishedError,
    SessionNotFoundError,
    SessionStore,
    advance,
    session_status,
    session_to_json,
    start_session,
)
from .registry import (
    EffectiveBlock,
    UnknownBlockError,
    Workspace,
    list_blocks,
    load_workspace,
    resolve,
)
from .rendering import RenderBindingError, render_model
from .store import (
    ChangeError,
    ChangeOp,
    ChangeSet,
    ModelExistsError,
    ModelNotFoundError,
    ModelStore,
    VersionConflictError,
)
from .validation import Diagnostic, diagnostic_line, explain, validate


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: Any = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details
        super().__init__(message)

    def body(self) -> dict:
        out: dict[str, Any] = {"status": self.status, "code": self.code, "message": self.message}
        if self.details is not None:
            out["details"] = self.details
        return out


# ---------------------------------------------------------------------------
# JSON shapes


def _value_type_json(vt) -> dict:
    out: dict[str, Any] = {"name": vt.name}
    if vt.name == "enum":
        out["enumValues"] = list(vt.enum_values)
    if vt.name == "elementRef":
        out["refKind"] = vt.ref_kind
    return out


def _block_summary_json(summary) -> dict:
    return {
        "name": summary.name,
        "parent": summary.parent,
        "elements": summary.elements,
        "constraints": summary.constraints,
        "nuances": summary.nuances,
        "steps": summary.steps,
    }


def _block_detail_json(block: EffectiveBlock) -> dict:
    return {
        "name": block.name,
        "lineage": list(block.lineage),
        "elements": [
            {
                "name": el.name,
                "role": el.role,
                **(
                    {"sourceKind": el.source_kind, "targetKind": el.target_kind}
                    if el.role == "edge"
                    else {}
                ),
                "attributes": [
                    {
                        "name": spec.name,
                        "type": _value_type_json(spec.value_type),
                        "required": spec.required,
                        "default": spec.default,
                    }
                    for spec in el.attributes
                ],
            }
            for el in block.elements
        ],
        "constraints": [
            {
                "id": c.id,
                "kind": c.kind,
                "params": dict(c.params),
                "severity": c.severity,
                "message": c.message,
            }
            for c in block.constraints
        ],
        "method": {
            "steps": [
                {
                    "id": step.id,
                    "title": step.title,
                    "description": step.description,
                    "completion": {
                        "kind": step.completion.kind,
                        "params": dict(step.completion.params),
                    },
                }
                for step in block.method.steps
            ]
        },
        "nuances": [
            {"id": n.id, "effect": n.effect, "params": dict(n.params), "reason": n.reason}
            for n in block.nuances
        ],
        "docs": [
            {"element": d.element, "attribute": d.attribute, "description": d.description}
            for d in block.docs
        ],
    }


def _model_json(model: Model) -> dict:
    return {
        "id": model.id,
        "blockName": model.block_name,
        "version": model.version,
        "elements": [
            {"name": el.name, "kind": el.kind, "attrs": dict(el.attrs)} for el in model.elements
        ],
    }


def _diag_json(diag: Diagnostic, block: EffectiveBlock) -> dict:
    return {
        "code": diag.code,
        "severity": diag.severity,
        "targets": list(diag.targets),
        "message": diag.message,
        "nuanceMarker": diag.nuance_marker,
        "explanation": explain(diag, block),
    }


def _session_json(session: Session, block: EffectiveBlock) -> dict:
    status = session_status(session, block)
    out = session_to_json(session)
    out["status"] = {
        "done": status.done,
        "total": status.total,
        "currentStepId": status.current_step_id,
        "currentTitle": status.current_title,
        "guidance": status.guidance,
    }
    return out


def _report_json(report: PredicateReport, block: EffectiveBlock) -> dict:
    return {
        "sessionId": report.session_id,
        "stepId": report.step_id,
        "predicate": {
            "kind": report.predicate.kind,
            "params": dict(report.predicate.params),
        },
        "satisfied": report.satisfied,
        "detail": report.detail,
        "diagnostics": [_diag_json(d, block) for d in report.diagnostics],
    }


def _attr_value(raw: Any, where: str) -> AttrValue:
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        raise ApiError(400, "bad-request", f"{where}: attribute values must be strings or numbers")
    return raw


def _elements_from_json(payload: Any) -> list[ModelElement]:
    if not isinstance(payload, list):
        raise ApiError(400, "bad-request", "elements must be an array")
    out: list[ModelElement] = []
    for idx, item in enumerate(payload):
        where = f"elements[{idx}]"
        if not isinstance(item, dict):
            raise ApiError(400, "bad-request", f"{where}: must be an object")
        name, kind = item.get("name"), item.get("kind")
        if not isinstance(name, str) or not isinstance(kind, str):
            raise ApiError(400, "bad-request", f"{where}: name and kind must be strings")
        attrs_raw = item.get("attrs", {})
        if not isinstance(attrs_raw, dict):
            raise ApiError(400, "bad-request", f"{where}: attrs must be an object")
        attrs = {
            str(key): _attr_value(value, where) for key, value in attrs_raw.items()
        }
        out.append(ModelElement(name=name, kind=kind, attrs=attrs))
    return out


def _changeset_from_json(payload: Any) -> ChangeSet:
    if not isinstance(payload, dict):
        raise ApiError(400, "bad-request", "body must be an object")
    base_version = payload.get("baseVersion")
    if not isinstance(base_version, int) or isinstance(base_version, bool):
        raise ApiError(400, "bad-request", "baseVersion must be an integer")
    ops_raw = payload.get("ops")
    if not isinstance(ops_raw, list):
        raise ApiError(400, "bad-request", "ops must be an array")
    ops: list[ChangeOp] = []
    for idx, item in enumerate(ops_raw):
        where = f"ops[{idx}]"
        if not isinstance(item, dict):
            raise ApiError(400, "bad-request", f"{where}: must be an object")
        op = item.get("op")
        kind = item.get("kind")
        name = item.get("name")
        if not isinstance(op, str) or not isinstance(kind, str) or not isinstance(name, str):
            raise ApiError(400, "bad-request", f"{where}: op, kind, and name must be strings")
        attrs_raw = item.get("attrs", {})
        if not isinstance(attrs_raw, dict):
            raise ApiError(400, "bad-request", f"{where}: attrs must be an object")
        value = item.get("value")
        ops.append(
            ChangeOp(
                op=op,
                kind=kind,
                name=name,
                attrs={str(k): _attr_value(v, where) for k, v in attrs_raw.items()},
                attr=str(item.get("attr", "")),
                value=None if value is None else _attr_value(value, where),
                source=str(item.get("source", "")),
                target=str(item.get("target", "")),
            )
        )
    return ChangeSet(base_version=base_version, ops=tuple(ops))


# ---------------------------------------------------------------------------
# Application


def create_app(workspace_dir: str | Path, cors_origin: str | None = None) -> FastAPI:
    workspace: Workspace = load_workspace(workspace_dir)
    store = ModelStore(workspace_dir)
    sessions = SessionStore(workspace_dir)
    app = FastAPI(title="blockbench", docs_url=None, redoc_url=None)

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=ApiError(400, "bad-request", "malformed request body").body(),
        )

    @app.exception_handler(BlockbenchError)
    async def _unexpected(_request: Request, exc: BlockbenchError) -> JSONResponse:
        return JSONResponse(
            status_code=500, content=ApiError(500, "internal", str(exc)).body()
        )

    def _block(name: str) -> EffectiveBlock:
        try:
            return resolve(workspace, name)
        except UnknownBlockError as exc:
            raise ApiError(404, "unknown-block", str(exc))
        except BlockbenchError as exc:
            raise ApiError(422, "block-unresolvable", str(exc))

    def _model(model_id: str) -> Model:
        try:
            return store.get(model_id)
        except ModelNotFoundError as exc:
            raise ApiError(404, "unknown-model", str(exc))

    def _session(session_id: str) -> Session:
        try:
            return sessions.get(session_id)
        except SessionNotFoundError as exc:
            raise ApiError(404, "unknown-session", str(exc))

    @app.get("/blocks")
    def get_blocks() -> list[dict]:
        return [_block_summary_json(s) for s in list_blocks(workspace)]

    @app.get("/blocks/{name}/docs")
    def get_block_docs(name: str) -> PlainTextResponse:
        return PlainTextResponse(generate_docs(_block(name)), media_type="text/markdown")

    @app.get("/blocks/{name}/method")
    def get_block_method(name: str) -> PlainTextResponse:
        return PlainTextResponse(generate_method_doc(_block(name)), media_type="text/markdown")

    @app.get("/blocks/{name}")
    def get_block(name: str) -> dict:
        return _block_detail_json(_block(name))

    @app.post("/models", status_code=201)
    def post_models(payload: dict = Body(...)) -> dict:
        block_name = payload.get("block")
        model_id = payload.get("name")
        if not isinstance(block_name, str) or not isinstance(model_id, str):
            raise ApiError(400, "bad-request", "body needs string fields 'block' and 'name'")
        block = _block(block_name)
        try:
            model = store.create(block, model_id)
        except ModelExistsError as exc:
            raise ApiError(409, "model-exists", str(exc))
        except ChangeError as exc:
            raise ApiError(400, "bad-request", str(exc))
        return _model_json(model)

    @app.get("/models/{model_id}")
    def get_model(model_id: str) -> dict:
        return _model_json(_model(model_id))

    @app.put("/models/{model_id}")
    def put_model(model_id: str, payload: dict = Body(...)) -> dict:
        model = _model(model_id)
        block = _block(model.block_name)
        base_version = payload.get("baseVersion")
        if not isinstance(base_version, int) or isinstance(base_version, bool):
            raise ApiError(400, "bad-request", "baseVersion must be an integer")
        elements = _elements_from_json(payload.get("elements"))
        try:
            updated = store.replace(model_id, base_version, elements, block)
        except VersionConflictError as exc:
            raise ApiError(
                409, "version-conflict", str(exc), details={"currentVersion": exc.current}
            )
        except ChangeError as exc:
            raise ApiError(
                422, "invalid-elements", "the replacement model fails binding",
                details={"problems": str(exc).split("; ")},
            )
        return _model_json(updated)

    @app.patch("/models/{model_id}")
    def patch_model(model_id: str, payload: dict = Body(...)) -> dict:
        model = _model(model_id)
        block = _block(model.block_name)
        change = _changeset_from_json(payload)
        try:
            updated = store.apply(model_id, change, block)
        except VersionConflictError as exc:
            raise ApiError(
                409, "version-conflict", str(exc), details={"currentVersion": exc.current}
            )
        except ChangeError as exc:
            raise ApiError(
                422, "change-invalid", "the change set cannot be applied",
                details={"problems": str(exc).split("; ")},
            )
        return _model_json(updated)

    @app.post("/models/{model_id}/validate")
    def post_validate(model_id: str) -> dict:
        model = _model(model_id)
        block = _block(model.block_name)
        diagnostics = validate(model, block)
        return {
            "modelId": model.id,
            "version": model.version,
            "diagnostics": [_diag_json(d, block) for d in diagnostics],
            "text": "".join(diagnostic_line(d) + "\n" for d in diagnostics),
        }

    @app.get("/models/{model_id}/render.svg")
    def get_render(model_id: str) -> Response:
        model = _model(model_id)
        block = _block(model.block_name)
        try:
            svg = render_model(model, block)
        except RenderBindingError as exc:
            raise ApiError(422, "binding-failed", str(exc))
        return Response(content=svg.encode("utf-8"), media_type="image/svg+xml")

    @app.post("/models/{model_id}/session", status_code=201)
    def post_session(model_id: str) -> dict:
        model = _model(model_id)
        block = _block(model.block_name)
        session = start_session(model, block)
        sessions.save(session)
        return _session_json(session, block)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = _session(session_id)
        block = _block(session.block_name)
        return _session_json(session, block)

    @app.post("/sessions/{session_id}/advance")
    def post_advance(session_id: str, payload: dict | None = Body(None)) -> dict:
        session = _session(session_id)
        block = _block(session.block_name)
        model = _model(session.model_id)
        confirm = bool(payload.get("confirm")) if isinstance(payload, dict) else False
        try:
            outcome = advance(session, model, block, confirm=confirm)
        except SessionFinishedError as exc:
            raise ApiError(409, "session-finished", str(exc))
        if isinstance(outcome, PredicateReport):
            return _report_json(outcome, block)
        sessions.save(outcome)
        return _session_json(outcome, block)

    return app
