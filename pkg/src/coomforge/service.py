"""HTTP facade for interactive configuration sessions.

Sessions live in process memory; each request on a session holds that
session's lock, so concurrent requests on one session serialize while
different sessions proceed in parallel. Idle sessions are evicted.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .parser import CoomParseError, parse_model, parse_user_input
from .session import EXHAUSTED, Session, assumptions_from_user_input
from .solver import Exclude, ExcludeValue, Fix, Include, solve
from .space import (
    ConfigurationSpace,
    InstantiationError,
    apply_user_input,
    instantiate,
    load_explanations,
    solution_to_coom,
    space_to_json,
)
from .validate import validate_ast

SESSION_IDLE_SECONDS = 30 * 60

_ACTIONS = {
    "include": Include,
    "exclude": Exclude,
    "fix": Fix,
    "excludeValue": ExcludeValue,
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, diagnostics=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.diagnostics = diagnostics

    def response(self) -> JSONResponse:
        body = {"code": self.code, "message": self.message}
        if self.diagnostics is not None:
            body["diagnostics"] = self.diagnostics
        return JSONResponse(body, status_code=self.status)


@dataclass
class SessionRecord:
    session: Session
    warnings: tuple
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = field(default_factory=time.monotonic)


class SessionStore:
    def __init__(self):
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, session: Session, warnings: tuple) -> str:
        sid = uuid.uuid4().hex
        with self._lock:
            self._evict()
            self._records[sid] = SessionRecord(session, warnings)
        return sid

    def get(self, sid: str) -> SessionRecord:
        with self._lock:
            self._evict()
            record = self._records.get(sid)
            if record is None:
                raise ApiError(404, "SessionNotFound", f"no session '{sid}'")
            record.last_used = time.monotonic()
            return record

    def delete(self, sid: str) -> bool:
        with self._lock:
            return self._records.pop(sid, None) is not None

    def _evict(self) -> None:
        deadline = time.monotonic() - SESSION_IDLE_SECONDS
        stale = [sid for sid, rec in self._records.items()
                 if rec.last_used < deadline]
        for sid in stale:
            del self._records[sid]


def _build_session(body: dict,
                   default_space: ConfigurationSpace | None,
                   default_explanations: dict[str, str] | None):
    source = body.get("model")
    if source is not None:
        try:
            ast = parse_model(source)
        except CoomParseError as exc:
            raise ApiError(422, "ParseError", "model does not parse",
                           [str(e) for e in exc.errors]) from None
        errors = validate_ast(ast)
        if errors:
            raise ApiError(422, "ValidationError", "model is not well-formed",
                           [str(e) for e in errors])
        try:
            space = instantiate(ast, max_bound=int(body.get("maxBound", 1)))
        except (InstantiationError, ValueError) as exc:
            raise ApiError(422, "InstantiationError", str(exc)) from None
    elif default_space is not None:
        space = default_space
    else:
        raise ApiError(400, "NoModel",
                       "request must supply a model; the server has no default")

    explanations = dict(default_explanations or {}) if source is None else {}
    sidecar = body.get("explanations")
    if isinstance(sidecar, dict):
        known = {c.id for c in space.booleans}
        explanations.update(
            {k: v for k, v in sidecar.items() if k in known})

    initial = []
    warnings: tuple = ()
    raw_input = body.get("userInput")
    if raw_input is not None:
        try:
            directives = parse_user_input(raw_input)
        except CoomParseError as exc:
            raise ApiError(422, "ParseError", "user input does not parse",
                           [str(e) for e in exc.errors]) from None
        applied = apply_user_input(space, directives)
        warnings = applied.warnings
        initial = assumptions_from_user_input(applied)
    return Session(space, explanations, initial), warnings


def create_app(default_space: ConfigurationSpace | None = None,
               default_explanations: dict[str, str] | None = None) -> FastAPI:
    app = FastAPI(title="coomforge", version="1.0")
    store = SessionStore()
    app.state.store = store

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return exc.response()

    async def read_body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "BadRequest", "request body is not JSON") from None
        if not isinstance(body, dict):
            raise ApiError(400, "BadRequest", "request body must be an object")
        return body

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await read_body(request)
        session, warnings = _build_session(
            body, default_space, default_explanations)
        sid = store.create(session, warnings)
        return {"sessionId": sid,
                "warnings": [str(w) for w in warnings],
                "view": session.view().to_json()}

    @app.delete("/sessions/{sid}")
    async def delete_session(sid: str):
        if not store.delete(sid):
            raise ApiError(404, "SessionNotFound", f"no session '{sid}'")
        return {"deleted": sid}

    @app.get("/sessions/{sid}/model")
    async def get_model(sid: str):
        record = store.get(sid)
        with record.lock:
            return space_to_json(record.session.space)

    @app.get("/sessions/{sid}/view")
    async def get_view(sid: str):
        record = store.get(sid)
        with record.lock:
            return record.session.view().to_json()

    @app.get("/sessions/{sid}/assumptions")
    async def list_assumptions(sid: str):
        record = store.get(sid)
        with record.lock:
            view = record.session.view()
            return {"assumptions": view.to_json()["assumptions"]}

    @app.post("/sessions/{sid}/assumptions")
    async def add_assumption(sid: str, request: Request):
        body = await read_body(request)
        action = body.get("action")
        target = body.get("target")
        if not isinstance(target, str):
            raise ApiError(400, "BadRequest", "string 'target' is required")
        record = store.get(sid)
        if action == "unfix":
            with record.lock:
                record.session.remove_for_target(target)
                return record.session.view().to_json()
        ctor = _ACTIONS.get(action)
        if ctor is None:
            raise ApiError(400, "BadRequest",
                           "'action' must be fix, unfix, include, exclude "
                           "or excludeValue")
        if ctor in (Fix, ExcludeValue):
            if "value" not in body:
                raise ApiError(400, "BadRequest", f"'{action}' needs a 'value'")
            assumption = ctor(target, body["value"])
        else:
            assumption = ctor(target)
        with record.lock:
            try:
                record.session.add_assumption(assumption)
            except KeyError:
                raise ApiError(409, "UnknownVariable",
                               f"variable '{target}' is not in the model") from None
            return record.session.view().to_json()

    @app.delete("/sessions/{sid}/assumptions/{num}")
    async def delete_assumption(sid: str, num: int):
        record = store.get(sid)
        with record.lock:
            if not record.session.remove_assumption(num):
                raise ApiError(404, "AssumptionNotFound",
                               f"no assumption with id {num}")
            return record.session.view().to_json()

    @app.post("/sessions/{sid}/browse")
    async def browse(sid: str, request: Request):
        body = await read_body(request)
        direction = body.get("direction", "next")
        if direction not in ("next", "reset"):
            raise ApiError(400, "BadRequest",
                           "'direction' must be 'next' or 'reset'")
        record = store.get(sid)
        with record.lock:
            if not record.session.view().satisfiable:
                raise ApiError(409, "Unsatisfiable",
                               "cannot browse an unsatisfiable session")
            result = record.session.browse(direction)
            if result is EXHAUSTED:
                return {"exhausted": True, "model": None,
                        "view": record.session.view().to_json()}
            return {"exhausted": False, "model": result.to_json(),
                    "view": record.session.view().to_json()}

    @app.get("/sessions/{sid}/solution")
    async def get_solution(sid: str):
        record = store.get(sid)
        with record.lock:
            session = record.session
            model = session.browsed_model
            if model is None:
                model = solve(session.space,
                              [a for _, a in session.assumptions])
            if model is None:
                raise ApiError(409, "Unsatisfiable",
                               "no solution under the current assumptions")
            return PlainTextResponse(solution_to_coom(session.space, model))

    return app
