"""HTTP/JSON service exposing classification sessions to the operator
console.

The server owns all session state; clients post evidence and poll the
question/ranking/merit views. Mutations on one session are serialized
by a per-session lock, distinct sessions are fully independent, and
journals are written out on shutdown so a dialogue can be replayed
later with the eval subcommand.
"""

from __future__ import annotations

import json
import os
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .compiler import load_model
from .errors import (
    EvidenceFormError,
    HelmError,
    InconsistentEvidenceError,
    InvalidModelError,
    InvalidNetworkError,
    NetworkFormatError,
    NotAskableError,
    QuestionStateError,
    SessionStateError,
    StaleReadError,
    UnknownNodeError,
    UnknownStateError,
)
from .session import Session

DEFAULT_PORT = 8642
MODELS_DIR_ENV = "HELM_MODELS_DIR"

_STATUS_BY_ERROR = {
    UnknownNodeError: 422,
    UnknownStateError: 422,
    NotAskableError: 422,
    EvidenceFormError: 422,
    InconsistentEvidenceError: 422,
    SessionStateError: 409,
    StaleReadError: 409,
    QuestionStateError: 409,
    InvalidModelError: 400,
    InvalidNetworkError: 400,
    NetworkFormatError: 400,
}


@dataclass
class ApiError(Exception):
    status: int
    code: str
    message: str

    def response(self) -> JSONResponse:
        return JSONResponse(status_code=self.status,
                            content={"code": self.code, "message": self.message})


def _api_error(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, HelmError):
        status = 500
        for kind, code in _STATUS_BY_ERROR.items():
            if isinstance(exc, kind):
                status = code
                break
        return ApiError(status=status, code=exc.code, message=str(exc))
    return ApiError(status=500, code="internal", message=str(exc))


class SessionRegistry:
    """Session store with per-session mutation locks."""

    def __init__(self, models_dir: Path, sessions_dir: Path | None = None):
        self.models_dir = Path(models_dir)
        self.sessions_dir = Path(sessions_dir) if sessions_dir else None
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def model_names(self) -> list[str]:
        if not self.models_dir.is_dir():
            return []
        return sorted(p.stem for p in self.models_dir.glob("*.json"))

    def load_model(self, name: str):
        if "/" in name or "\\" in name or name.startswith("."):
            raise ApiError(404, "model-not-found", f"no model named {name!r}")
        path = self.models_dir / f"{name}.json"
        if not path.is_file():
            raise ApiError(404, "model-not-found", f"no model named {name!r}")
        return load_model(path.read_text())

    def create(self, model_name: str, engine: str) -> Session:
        if engine not in ("bms", "prospector"):
            raise ApiError(422, "unknown-engine",
                           f"engine must be 'bms' or 'prospector', got {engine!r}")
        session = Session(self.load_model(model_name), engine)
        session.model_name = model_name
        with self._registry_lock:
            self.sessions[session.id] = session
            self.locks[session.id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ApiError(404, "unknown-session",
                           f"no session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        return self.locks[session_id]

    def persist_all(self) -> list[Path]:
        if self.sessions_dir is None:
            return []
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for session in self.sessions.values():
            path = self.sessions_dir / f"{session.id}.json"
            payload = {
                "id": session.id,
                "model": getattr(session, "model_name", ""),
                "engine": session.engine.value,
                "status": session.status,
                "reason": session.stop_reason,
                "journal": session.journal_export(),
            }
            path.write_text(json.dumps(payload, indent=2) + "\n")
            written.append(path)
        return written


class CreateSessionBody(BaseModel):
    model: str
    engine: str


class EvidenceBody(BaseModel):
    node: str
    form: str = "hard"
    value: object = None
    source: str = "volunteered"


class StopBody(BaseModel):
    threshold: float = 0.95
    force: bool = False


def _ranking_rows(session: Session) -> list[dict]:
    return [{"class": c, "probability": p} for c, p in session.ranking()]


def _question_view(session: Session) -> dict:
    if session.status != "active":
        return {"question": None}
    question = session.ask()
    if question is None:
        return {"question": None}
    table = {r.question: r for r in session.merits()}
    record = table[question]
    return {
        "question": question,
        "label": session.question_label(question),
        "states": session.question_states(question),
        "merit": record.merit,
        "deltaP": record.delta_p,
        "cost": record.cost,
    }


def _session_view(session: Session) -> dict:
    return {
        "id": session.id,
        "model": getattr(session, "model_name", ""),
        "engine": session.engine.value,
        "status": session.status,
        "reason": session.stop_reason,
        "ranking": _ranking_rows(session),
        "journal": session.journal_export(),
        "answered": sorted(session.answered()),
        "askables": list(session.askables),
    }


def create_app(models_dir: str | Path | None = None,
               sessions_dir: str | Path | None = None) -> FastAPI:
    models = Path(models_dir or os.environ.get(MODELS_DIR_ENV, "models"))
    registry = SessionRegistry(models, sessions_dir)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        registry.persist_all()

    app = FastAPI(title="helm classification service", lifespan=lifespan)
    app.state.registry = registry
    # the operator console is a static page served from another origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(HelmError)
    async def handle_helm_error(request: Request, exc: HelmError):
        return _api_error(exc).response()

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc):
        return JSONResponse(status_code=422,
                            content={"code": "invalid-request",
                                     "message": str(exc)})

    @app.get("/models")
    def list_models():
        return {"models": registry.model_names()}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = registry.create(body.model, body.engine)
        return {"id": session.id, "model": body.model, "engine": body.engine,
                "status": session.status}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        with registry.lock(session_id):
            return _session_view(registry.get(session_id))

    @app.post("/sessions/{session_id}/evidence")
    def post_session_evidence(session_id: str, body: EvidenceBody):
        with registry.lock(session_id):
            session = registry.get(session_id)
            if body.source == "asked":
                session.answer(body.node, body.value)
            else:
                session.volunteer(body.node, body.form, body.value)
            return {"status": session.status, "ranking": _ranking_rows(session)}

    @app.get("/sessions/{session_id}/question")
    def get_question(session_id: str):
        with registry.lock(session_id):
            return _question_view(registry.get(session_id))

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str):
        with registry.lock(session_id):
            session = registry.get(session_id)
            return {"ranking": _ranking_rows(session), "status": session.status}

    @app.get("/sessions/{session_id}/beliefs")
    def get_beliefs(session_id: str):
        with registry.lock(session_id):
            return {"beliefs": registry.get(session_id).beliefs()}

    @app.get("/sessions/{session_id}/merits")
    def get_merits(session_id: str):
        with registry.lock(session_id):
            session = registry.get(session_id)
            return {"merits": [r.as_dict() for r in session.merits()]}

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str, body: StopBody | None = None):
        body = body or StopBody()
        with registry.lock(session_id):
            session = registry.get(session_id)
            if body.force:
                session.stop("operator")
            else:
                session.stop_check(body.threshold)
            return {"status": session.status, "reason": session.stop_reason}

    return app


def serve(models_dir: str | Path | None = None, port: int = DEFAULT_PORT,
          sessions_dir: str | Path | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(models_dir, sessions_dir), host=host, port=port)
