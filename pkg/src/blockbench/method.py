"""Guided modelling sessions over a block's method steps.

A session is a monotone progress record: exactly one step is current until
everything is done, statuses only move forward, and advancing checks the
current step's completion predicate against the live model. An unmet
predicate yields a PredicateReport instead of a state change.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .core import BlockbenchError, Model, PredicateSpec
from .registry import EffectiveBlock
from .validation import Diagnostic, bound_elements, severity_rank, validate

PENDING = "pending"
CURRENT = "current"
DONE = "done"


class SessionError(BlockbenchError):
    pass


class SessionFinishedError(SessionError):
    def __init__(self, session_id: str):
        super().__init__(f"session '{session_id}' has already finished all steps")


class SessionNotFoundError(SessionError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"session '{session_id}' does not exist")


@dataclass(frozen=True)
class StepState:
    step_id: str
    status: str


@dataclass(frozen=True)
class Session:
    id: str
    model_id: str
    block_name: str
    step_states: tuple[StepState, ...]
    started_at: str
    updated_at: str

    def current_step_id(self) -> str | None:
        for state in self.step_states:
            if state.status == CURRENT:
                return state.step_id
        return None

    def finished(self) -> bool:
        return all(state.status == DONE for state in self.step_states)


@dataclass(frozen=True)
class PredicateReport:
    """Why the current step did not complete."""

    session_id: str
    step_id: str
    predicate: PredicateSpec
    satisfied: bool
    detail: str
    diagnostics: tuple[Diagnostic, ...] = ()


@dataclass(frozen=True)
class SessionStatus:
    done: int
    total: int
    current_step_id: str | None
    current_title: str | None
    guidance: str | None


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def predicate_text(predicate: PredicateSpec) -> str:
    """Human rendering of a completion predicate, shared with the docs."""
    params = predicate.params
    if predicate.kind == "element-count-at-least":
        n = int(params["n"])
        noun = "element" if n == 1 else "elements"
        return f"the model contains at least {n} {params['kind']} {noun}"
    if predicate.kind == "all-of-kind-have-attribute":
        return f"every {params['kind']} element has its {params['attr']} attribute set"
    if predicate.kind == "model-valid":
        return f"the model validates with no findings at severity {params['severity']} or above"
    if predicate.kind == "manual-confirm":
        return "confirmed by the user"
    return predicate.kind


def start_session(model: Model, block: EffectiveBlock) -> Session:
    steps = block.method.steps
    if not steps:
        raise SessionError(f"block '{block.name}' declares no method steps")
    states = tuple(
        StepState(step.id, CURRENT if idx == 0 else PENDING) for idx, step in enumerate(steps)
    )
    now = _now()
    return Session(
        id=uuid.uuid4().hex,
        model_id=model.id,
        block_name=block.name,
        step_states=states,
        started_at=now,
        updated_at=now,
    )


def _evaluate(
    predicate: PredicateSpec, model: Model, block: EffectiveBlock, confirm: bool
) -> tuple[bool, str, tuple[Diagnostic, ...]]:
    params = predicate.params
    if predicate.kind == "element-count-at-least":
        needed = int(params["n"])
        count = sum(1 for el in model.elements if el.kind == params["kind"])
        return count >= needed, f"requires ≥{needed}, found {count}", ()
    if predicate.kind == "all-of-kind-have-attribute":
        missing = [
            el.name
            for el in bound_elements(model, block)
            if el.kind == params["kind"] and params["attr"] not in el.attrs
        ]
        detail = (
            f"requires {params['attr']} on every {params['kind']};"
            f" missing on {', '.join(sorted(missing))}"
            if missing
            else "satisfied"
        )
        return not missing, detail, ()
    if predicate.kind == "model-valid":
        threshold = severity_rank(params["severity"])
        offending = tuple(
            d for d in validate(model, block) if severity_rank(d.severity) >= threshold
        )
        noun = "finding" if len(offending) == 1 else "findings"
        detail = (
            f"{len(offending)} {noun} at severity {params['severity']} or above"
            if offending
            else "satisfied"
        )
        return not offending, detail, offending
    if predicate.kind == "manual-confirm":
        return confirm, "requires explicit confirmation", ()
    raise AssertionError(f"unreachable: checked predicate {predicate.kind!r}")


def advance(
    session: Session, model: Model, block: EffectiveBlock, confirm: bool = False
) -> Session | PredicateReport:
    """Complete the current step if its predicate holds.

    Returns the updated session on success, a PredicateReport when the
    predicate is unmet. The model is never touched.
    """
    if model.id != session.model_id:
        raise SessionError(
            f"session '{session.id}' belongs to model '{session.model_id}', not '{model.id}'"
        )
    current_id = session.current_step_id()
    if current_id is None:
        raise SessionFinishedError(session.id)
    step = next(s for s in block.method.steps if s.id == current_id)
    satisfied, detail, diagnostics = _evaluate(step.completion, model, block, confirm)
    if not satisfied:
        return PredicateReport(
            session_id=session.id,
            step_id=step.id,
            predicate=step.completion,
            satisfied=False,
            detail=detail,
            diagnostics=diagnostics,
        )
    states: list[StepState] = []
    promote_next = False
    for state in session.step_states:
        if state.step_id == current_id:
            states.append(StepState(state.step_id, DONE))
            promote_next = True
        elif promote_next and state.status == PENDING:
            states.append(StepState(state.step_id, CURRENT))
            promote_next = False
        else:
            states.append(state)
    return Session(
        id=session.id,
        model_id=session.model_id,
        block_name=session.block_name,
        step_states=tuple(states),
        started_at=session.started_at,
        updated_at=_now(),
    )


def session_status(session: Session, block: EffectiveBlock) -> SessionStatus:
    done = sum(1 for state in session.step_states if state.status == DONE)
    total = len(session.step_states)
    current_id = session.current_step_id()
    title = guidance = None
    if current_id is not None:
        step = next((s for s in block.method.steps if s.id == current_id), None)
        if step is not None:
            title = step.title
            prefix = f"{step.description} " if step.description else ""
            guidance = f"{prefix}Done when {predicate_text(step.completion)}."
    return SessionStatus(done, total, current_id, title, guidance)


# ---------------------------------------------------------------------------
# JSON shape and persistence


def session_to_json(session: Session) -> dict:
    return {
        "id": session.id,
        "modelId": session.model_id,
        "blockName": session.block_name,
        "stepStates": [
            {"stepId": state.step_id, "status": state.status} for state in session.step_states
        ],
        "startedAt": session.started_at,
        "updatedAt": session.updated_at,
    }


def session_from_json(data: dict) -> Session:
    return Session(
        id=data["id"],
        model_id=data["modelId"],
        block_name=data["blockName"],
        step_states=tuple(
            StepState(item["stepId"], item["status"]) for item in data["stepStates"]
        ),
        started_at=data["startedAt"],
        updated_at=data["updatedAt"],
    )


class SessionStore:
    """Sessions persisted under <workspace>/sessions, one JSON file per id."""

    def __init__(self, workspace_dir: str | Path):
        self.sessions_dir = Path(workspace_dir) / "sessions"
        self._lock = threading.Lock()

    def _path(self, session_id: str) -> Path:
        if not session_id.isalnum():
            raise SessionNotFoundError(session_id)
        return self.sessions_dir / f"{session_id}.json"

    def save(self, session: Session) -> None:
        with self._lock:
            self.sessions_dir.mkdir(parents=True, exist_ok=True)
            path = self.sessions_dir / f"{session.id}.json"
            path.write_text(
                json.dumps(session_to_json(session), indent=2) + "\n", encoding="utf-8"
            )

    def get(self, session_id: str) -> Session:
        path = self._path(session_id)
        if not path.is_file():
            raise SessionNotFoundError(session_id)
        return session_from_json(json.loads(path.read_text(encoding="utf-8")))

    def list_ids(self) -> list[str]:
        if not self.sessions_dir.is_dir():
            return []
        return sorted(p.stem for p in self.sessions_dir.glob("*.json"))
