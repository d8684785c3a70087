"""HTTP facade over the orchestrator.

Every failure body is ApiError JSON ({status, code, message, details?});
session state endpoints serve the persisted bytes verbatim, so a restarted
service answers byte-identically for existing sessions.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .gateway import AuthError, BadRequestError, GatewayError
from .orchestrator import Orchestrator, Session, SessionConfig, TurnRecord, _turn_to_json


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details

    def to_response(self) -> JSONResponse:
        body = {"status": self.status, "code": self.code, "message": self.message}
        if self.details:
            body["details"] = self.details
        return JSONResponse(status_code=self.status, content=body)


class SessionCreateBody(BaseModel):
    config: dict | None = None


class PromptBody(BaseModel):
    text: str


class ModelBody(BaseModel):
    text: str


def create_app(
    orchestrator: Orchestrator,
    ui_dir: Path | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="lfforge service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return exc.to_response()

    @app.exception_handler(Exception)
    async def handle_unexpected(_request: Request, exc: Exception) -> JSONResponse:
        return ApiError(500, "internal_error", str(exc)).to_response()

    def must_get_session(session_id: str) -> Session:
        session = orchestrator.get_session(session_id)
        if session is None:
            raise ApiError(404, "session_not_found", f"no session with id '{session_id}'")
        return session

    def run_gateway(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BadRequestError as exc:
            raise ApiError(400, "bad_request", str(exc)) from exc
        except AuthError as exc:
            raise ApiError(502, "gateway_auth", str(exc)) from exc
        except GatewayError as exc:
            raise ApiError(502, "gateway_error", str(exc)) from exc

    @app.get("/api/health")
    def health() -> dict:
        return {"ok": True}

    @app.get("/api/tools")
    def tools() -> list[dict]:
        return orchestrator.registry.list_tools()

    @app.post("/api/sessions")
    def create_session(body: SessionCreateBody | None = None) -> dict:
        config_data = (body.config if body else None) or {}
        try:
            config = SessionConfig(**config_data)
        except (TypeError, ValueError) as exc:
            raise ApiError(400, "bad_config", f"invalid session config: {exc}") from exc
        session = orchestrator.create_session(config)
        return {"id": session.id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> Response:
        raw = orchestrator.store.raw_bytes(session_id)
        if raw is None:
            raise ApiError(404, "session_not_found", f"no session with id '{session_id}'")
        return Response(content=raw, media_type="application/json")

    @app.post("/api/sessions/{session_id}/audio")
    def post_audio(session_id: str, file: UploadFile, language: str | None = None) -> dict:
        session = must_get_session(session_id)
        audio = file.file.read()
        media_type = file.content_type or "application/octet-stream"
        transcript, turn = run_gateway(
            orchestrator.submit_audio, session, audio, media_type, language
        )
        out: dict = {"transcript": transcript, "pending": turn is None}
        if turn is not None:
            out["turn"] = _turn_to_json(turn)
        return out

    @app.post("/api/sessions/{session_id}/prompt")
    def post_prompt(session_id: str, body: PromptBody) -> dict:
        session = must_get_session(session_id)
        if not body.text.strip():
            raise ApiError(400, "empty_prompt", "prompt text must not be empty")
        turn: TurnRecord = run_gateway(orchestrator.submit_prompt, session, body.text)
        return _turn_to_json(turn)

    @app.put("/api/sessions/{session_id}/model")
    def put_model(session_id: str, body: ModelBody) -> dict:
        session = must_get_session(session_id)
        turn = orchestrator.edit_model(session, body.text)
        return _turn_to_json(turn)

    @app.get("/api/sessions/{session_id}/diagram")
    def get_diagram(session_id: str, turn: int | None = None, format: str = "svg") -> Response:
        session = must_get_session(session_id)
        if format not in ("svg", "json"):
            raise ApiError(400, "bad_format", "format must be 'svg' or 'json'")
        index = turn if turn is not None else _latest_diagram_turn(session)
        if index is None:
            raise ApiError(404, "no_diagram", "no diagram artifact exists yet")
        raw = orchestrator.store.read_artifact(session_id, index, format)
        if raw is None:
            raise ApiError(404, "no_diagram", f"no diagram artifact for turn {index}")
        media = "image/svg+xml" if format == "svg" else "application/json"
        return Response(content=raw, media_type=media)

    @app.get("/api/sessions/{session_id}/diagnostics")
    def get_diagnostics(session_id: str, turn: int | None = None) -> list[dict]:
        session = must_get_session(session_id)
        if turn is None:
            turn = len(session.turns) - 1
        if turn < 0 or turn >= len(session.turns):
            raise ApiError(404, "turn_not_found", f"no turn {turn} in session")
        return [d.to_json() for d in session.turns[turn].diagnostics]

    @app.get("/api/sessions/{session_id}/progress")
    def get_progress(session_id: str) -> dict:
        must_get_session(session_id)
        return orchestrator.progress(session_id)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _latest_diagram_turn(session: Session) -> int | None:
    for turn in reversed(session.turns):
        if turn.diagram is not None:
            return turn.index
    return None
