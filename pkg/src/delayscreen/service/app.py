"""HTTP service exposing the screening workflow.

One process owns one writable case base. Screening sessions live in memory
with a TTL and disappear unless retained; retained cases are written
through to the case-base file under a single writer lock.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..casebase import CaseBase
from ..engine import (
    ScreeningSession,
    SessionClosed,
    SessionState,
    process_new_case,
    retain_session,
    revise,
)
from ..scale import (
    DelayStatus,
    IncompleteSheet,
    NonPositiveAge,
    ScaleDefinition,
    ScaleError,
    UnknownQuestion,
    default_scale,
    load_scale,
    scale_to_document,
    sheet_from_document,
)
from ..similarity import WeightProfile, default_weights, load_weights
from .schemas import (
    ApiErrorBody,
    CaseListResponse,
    CaseView,
    HealthResponse,
    PurgeResponse,
    RetainResponse,
    ReviseBody,
    SessionView,
    SheetBody,
)

logger = logging.getLogger(__name__)

DEFAULT_SESSION_TTL_SECONDS = 3600.0
DEFAULT_PAGE_LIMIT = 50
MAX_PAGE_LIMIT = 500


@dataclass
class ServiceSettings:
    casebase_path: Path | None = None
    scale_path: Path | None = None
    weights_path: Path | None = None
    retrieval_k: int = 10
    session_ttl_seconds: float = DEFAULT_SESSION_TTL_SECONDS
    ui_dir: Path | None = None


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


@dataclass
class AppState:
    settings: ServiceSettings
    scale: ScaleDefinition
    weights: WeightProfile
    base: CaseBase
    sessions: dict[str, tuple[ScreeningSession, float]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _session_counter: int = 0

    def next_session_id(self) -> str:
        self._session_counter += 1
        return f"s-{self._session_counter:06d}"

    def sweep_expired(self) -> None:
        now = time.monotonic()
        expired = [sid for sid, (_, deadline) in self.sessions.items() if deadline < now]
        for sid in expired:
            del self.sessions[sid]

    def store_session(self, session: ScreeningSession) -> None:
        deadline = time.monotonic() + self.settings.session_ttl_seconds
        self.sessions[session.session_id] = (session, deadline)

    def get_session(self, session_id: str) -> ScreeningSession:
        self.sweep_expired()
        entry = self.sessions.get(session_id)
        if entry is None:
            raise ApiError(404, "UnknownSession", f"no session {session_id!r}")
        return entry[0]

    def persist(self) -> None:
        if self.settings.casebase_path is not None:
            self.base.save(self.settings.casebase_path)

    def solutions_for(self, session: ScreeningSession) -> dict[str, str]:
        out = {}
        for match in session.matches:
            record = self.base.records.get(match.case_id)
            out[match.case_id] = record.solution if record else ""
        return out


def build_state(settings: ServiceSettings) -> AppState:
    scale = load_scale(settings.scale_path) if settings.scale_path else default_scale()
    weights = load_weights(settings.weights_path) if settings.weights_path else default_weights()
    if settings.casebase_path is not None and Path(settings.casebase_path).exists():
        base = CaseBase.load(settings.casebase_path)
    else:
        base = CaseBase()
    state = AppState(settings=settings, scale=scale, weights=weights, base=base)
    if settings.casebase_path is not None and not Path(settings.casebase_path).exists():
        state.persist()
    return state


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    state = build_state(settings or ServiceSettings())
    app = FastAPI(title="delayscreen", version=__version__)
    app.state.screening = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def error_response(status_code: int, code: str, message: str, detail=None) -> JSONResponse:
        body = ApiErrorBody(code=code, message=message, detail=detail)
        return JSONResponse(status_code=status_code, content=jsonable_encoder(body))

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return error_response(exc.status_code, exc.code, exc.message)

    @app.exception_handler(ScaleError)
    async def handle_scale_error(request: Request, exc: ScaleError):
        if isinstance(exc, NonPositiveAge):
            return error_response(422, "NonPositiveAge", str(exc))
        if isinstance(exc, UnknownQuestion):
            return error_response(400, "UnknownQuestion", str(exc))
        if isinstance(exc, IncompleteSheet):
            return error_response(400, "IncompleteSheet", str(exc))
        return error_response(400, type(exc).__name__, str(exc))

    @app.exception_handler(SessionClosed)
    async def handle_session_closed(request: Request, exc: SessionClosed):
        return error_response(409, "SessionClosed", str(exc))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return error_response(422, "ValidationError", "request body failed validation", exc.errors())

    @app.post("/sessions", response_model=SessionView, status_code=201)
    def create_session(body: SheetBody):
        sheet = sheet_from_document(body.as_document())
        with state.lock:
            state.sweep_expired()
            session = process_new_case(
                sheet,
                state.base,
                state.scale,
                state.weights,
                k=state.settings.retrieval_k,
                session_id=state.next_session_id(),
            )
            state.store_session(session)
            return SessionView.from_session(session, state.solutions_for(session))

    @app.post("/sessions/{session_id}/revise", response_model=SessionView)
    def revise_session(session_id: str, body: ReviseBody):
        with state.lock:
            session = state.get_session(session_id)
            override = None
            if body.status_override is not None:
                try:
                    override = DelayStatus(body.status_override)
                except ValueError:
                    raise ApiError(
                        422, "ValidationError",
                        f"status_override must be one of {[s.value for s in DelayStatus]}",
                    )
            revise(session, reviser=body.reviser, solution=body.solution, status_override=override)
            return SessionView.from_session(session, state.solutions_for(session))

    @app.post("/sessions/{session_id}/retain", response_model=RetainResponse)
    def retain(session_id: str):
        with state.lock:
            session = state.get_session(session_id)
            outcome, _ = retain_session(session, state.base)
            state.persist()
            return RetainResponse(case_id=outcome.case_id, outcome=outcome.kind.value)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str):
        with state.lock:
            session = state.get_session(session_id)
            return SessionView.from_session(session, state.solutions_for(session))

    @app.get("/cases", response_model=CaseListResponse)
    def list_cases(offset: int = 0, limit: int = DEFAULT_PAGE_LIMIT):
        if offset < 0 or limit < 1:
            raise ApiError(422, "ValidationError", "offset must be >= 0 and limit >= 1")
        limit = min(limit, MAX_PAGE_LIMIT)
        with state.lock:
            records = list(state.base.records.values())
            items = [CaseView.from_record(r) for r in records[offset : offset + limit]]
            return CaseListResponse(total=len(records), offset=offset, limit=limit, items=items)

    @app.get("/cases/{case_id}", response_model=CaseView)
    def get_case(case_id: str):
        with state.lock:
            record = state.base.records.get(case_id)
            if record is None:
                raise ApiError(404, "UnknownCase", f"no case {case_id!r}")
            return CaseView.from_record(record)

    @app.delete("/cases/{case_id}", response_model=PurgeResponse)
    def delete_case(case_id: str):
        with state.lock:
            if case_id not in state.base.records:
                raise ApiError(404, "UnknownCase", f"no case {case_id!r}")
            result = state.base.purge([case_id])
            state.persist()
            return PurgeResponse(removed=list(result.removed), unknown=list(result.unknown))

    @app.get("/scale")
    def get_scale():
        return scale_to_document(state.scale)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(
            status="ok",
            service="delayscreen",
            version=__version__,
            case_count=len(state.base),
        )

    if state.settings.ui_dir is not None and Path(state.settings.ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=state.settings.ui_dir, html=True), name="ui")

    return app
