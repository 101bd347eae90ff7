"""HTTP JSON API over live audit sessions.

The service owns the sessions; clients (the audit console, scripts) see
only JSON.  Every displayed number comes from the engine through these
endpoints, and the session log is downloadable at any time for
independent replay.

Routes:

    POST /sessions                         create a session from a config payload
    GET  /sessions/{id}                    state summary plus contest schemas
    POST /sessions/{id}/draws              issue the next draw
    POST /sessions/{id}/interpretations    resolve the pending draw (found / not_found)
    GET  /sessions/{id}/trajectory         per-draw P-value points with zombie annotations
    GET  /sessions/{id}/log                the digest-chained session log as JSON Lines

Mutating endpoints serialize on a per-service lock: one exclusive writer
per session, concurrent readers see consistent snapshots.
"""

from __future__ import annotations

import secrets
import threading
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from .contest import contest_to_json, interpretation_from_json
from .session import (
    Found,
    InterpretationSchemaMismatch,
    InvalidConfig,
    NoPendingDraw,
    NotFound,
    PendingInterpretation,
    ScenarioHalt,
    Session,
    SessionError,
    SessionNotActive,
    _location_to_json,
    config_from_payload,
    start_session,
)
from .scenario import decision_to_json

_CONFLICTS = (SessionNotActive, PendingInterpretation, NoPendingDraw)


class SessionStore:
    """In-memory sessions keyed by opaque ids."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self.lock = threading.Lock()

    def add(self, session: Session) -> str:
        session_id = secrets.token_hex(8)
        self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> Session | None:
        return self._sessions.get(session_id)


def _error_response(exc: Exception, status: int) -> JSONResponse:
    body = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, ScenarioHalt):
        body["decision"] = decision_to_json(exc.decision)
    return JSONResponse(status_code=status, content=body)


def _not_found(session_id: str) -> JSONResponse:
    return JSONResponse(
        status_code=404,
        content={"error": "UnknownSession", "detail": f"no session {session_id!r}"},
    )


def _maybe_evaluate(session: Session) -> dict | None:
    """Evaluate when legal (no pending draw); the caller includes the
    verdict in the response so the console can show it immediately."""
    if session.pending is not None:
        return None
    decision = session.evaluate()
    return {
        "decision": decision.value,
        "status": session.status.value,
        "p_value": session.p_value(),
    }


def create_app(store: SessionStore | None = None, frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="audit engine", docs_url=None, redoc_url=None)
    sessions = store if store is not None else SessionStore()
    app.state.store = sessions

    @app.exception_handler(SessionError)
    def _session_error(_request, exc: SessionError):
        if isinstance(exc, _CONFLICTS):
            return _error_response(exc, 409)
        return _error_response(exc, 400)

    @app.exception_handler(ValueError)
    def _value_error(_request, exc: ValueError):
        return _error_response(exc, 400)

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        with sessions.lock:
            try:
                config = config_from_payload(payload)
            except (KeyError, TypeError) as exc:
                return _error_response(
                    InvalidConfig(f"malformed config payload: {exc!r}"), 400
                )
            session = start_session(config)
            session_id = sessions.add(session)
            return {
                "session_id": session_id,
                "state": session.state_json(),
                "contests": [contest_to_json(c) for c in config.contests],
            }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _not_found(session_id)
        with sessions.lock:
            return {
                "state": session.state_json(),
                "contests": [contest_to_json(c) for c in session.config.contests],
            }

    @app.post("/sessions/{session_id}/draws")
    def next_draw(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _not_found(session_id)
        with sessions.lock:
            result = session.next_draw()
            return {
                "counter": result.counter,
                "draw_number": result.draw_number,
                "location": _location_to_json(result.location),
                "auto_resolved": result.auto_resolved,
                "p_value": result.p_value,
                "evaluation": _maybe_evaluate(session),
                "state": session.state_json(),
            }

    @app.post("/sessions/{session_id}/interpretations")
    def record_interpretation(session_id: str, payload: dict = Body(...)):
        session = sessions.get(session_id)
        if session is None:
            return _not_found(session_id)
        with sessions.lock:
            outcome = payload.get("outcome")
            note = payload.get("note")
            if note is not None and not isinstance(note, str):
                raise InterpretationSchemaMismatch("note must be a string")
            if outcome == "not_found":
                session.record_interpretation(NotFound(note=note))
            elif outcome == "found":
                if "interpretation" not in payload:
                    raise InterpretationSchemaMismatch(
                        "a found ballot needs an interpretation"
                    )
                ballot = interpretation_from_json(payload["interpretation"])
                session.record_interpretation(Found(ballot=ballot, note=note))
            else:
                raise InterpretationSchemaMismatch(
                    f"outcome must be 'found' or 'not_found', got {outcome!r}"
                )
            return {
                "p_value": session.p_value(),
                "evaluation": _maybe_evaluate(session),
                "state": session.state_json(),
            }

    @app.get("/sessions/{session_id}/trajectory")
    def trajectory(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _not_found(session_id)
        with sessions.lock:
            return {
                "points": list(session.trajectory),
                "p_value": session.p_value(),
                "status": session.status.value,
            }

    @app.get("/sessions/{session_id}/log")
    def download_log(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _not_found(session_id)
        with sessions.lock:
            text = "\n".join(session.log_lines()) + "\n"
        return PlainTextResponse(text, media_type="application/jsonl")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="console")

    return app


app = create_app()
