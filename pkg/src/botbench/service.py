"""HTTP facade over the store, graph, and regression engine, plus the
prompt -> complete -> extract orchestration used by both the API and the CLI.

One process owns one store directory: mutations are serialized and persisted
after every successful change, LM calls may overlap across conversations but
are serialized per conversation, and a failed generation never leaves a
half-appended turn behind.
"""

from __future__ import annotations

import copy
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import __version__
from .errors import (
    AuthError,
    BackendUnavailableError,
    BotBenchError,
    DuplicateIdError,
    DuplicateTagError,
    EmptyTextError,
    EmptyUtteranceError,
    InvalidTagNameError,
    InvalidTemplateError,
    NoMatchingRuleError,
    ProtocolError,
    RateLimitedError,
    ReferentialIntegrityError,
    RoleAlternationError,
    RoleOrderError,
    SchemaVersionError,
    StoreIOError,
    TagNotFoundError,
    TurnIndexError,
    UnknownConversationError,
    UnknownReportError,
    UnknownTaskError,
    UnknownTemplateError,
)
from .graph import build_dag, export_dag
from .llm import CompletionBackend, backend_from_spec
from .model import Tag, Task, Turn, new_id
from .regression import RegressionReport, collect_cases, list_reports, run_regression
from .store import Store, load_store, persist_store, reports_dir, store_path
from .templates import ChatbotTemplate, extract_utterance, render_prompt, validate_template

_STATUS_BY_ERROR: list[tuple[type[BotBenchError], int]] = [
    (UnknownTaskError, 404),
    (UnknownTemplateError, 404),
    (UnknownConversationError, 404),
    (UnknownReportError, 404),
    (TagNotFoundError, 404),
    (TurnIndexError, 404),
    (RoleAlternationError, 409),
    (RoleOrderError, 409),
    (DuplicateTagError, 409),
    (DuplicateIdError, 409),
    (EmptyTextError, 400),
    (InvalidTagNameError, 400),
    (InvalidTemplateError, 400),
    (SchemaVersionError, 400),
    (ReferentialIntegrityError, 400),
    (StoreIOError, 500),
    (BackendUnavailableError, 502),
    (AuthError, 502),
    (RateLimitedError, 502),
    (NoMatchingRuleError, 502),
    (ProtocolError, 502),
    (EmptyUtteranceError, 502),
]


def status_for(exc: BotBenchError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return status
    return 500


@dataclass
class ServiceConfig:
    """Where the store lives and which completion backend serves it.

    lm_backend is a spec string: `mock:<script path>` or `remote` (remote
    reads LM_BASE_URL / LM_API_KEY / LM_MODEL from the environment).
    """

    store_path: str | Path
    lm_backend: str = "remote"
    port: int = 8000

    def validate(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be in [1, 65535], got {self.port}")


class Workbench:
    """Store + backend with the orchestration the collector needs."""

    def __init__(self, store_dir: str | Path, backend: CompletionBackend):
        self.store_dir = Path(store_dir)
        self.backend = backend
        if store_path(self.store_dir).exists():
            self.store = load_store(self.store_dir)
        else:
            self.store = Store()
            persist_store(self.store, self.store_dir)
        self._lock = threading.RLock()
        self._conversation_locks: dict[str, threading.Lock] = {}

    def _persist(self) -> None:
        persist_store(self.store, self.store_dir)

    def _conversation_lock(self, conversation_id: str) -> threading.Lock:
        with self._lock:
            lock = self._conversation_locks.get(conversation_id)
            if lock is None:
                lock = self._conversation_locks[conversation_id] = threading.Lock()
            return lock

    def mutate(self, fn):
        """Run a store mutation under the writer lock and persist the result."""
        with self._lock:
            result = fn(self.store)
            self._persist()
            return result

    def _generate(self, conversation_id: str, extra_user_text: str | None) -> tuple[Turn | None, Turn]:
        """Shared generation path. Renders the prompt (optionally with a
        pending user turn that is not yet stored), completes, extracts, and
        only then appends the turn(s). Any failure leaves the store untouched."""
        with self._lock:
            conversation = self.store.get_conversation(conversation_id)
            task = self.store.get_task(conversation.task_id)
            template = self.store.get_template(conversation.template_id)
        history = list(conversation.turns)
        if extra_user_text is not None:
            if history and history[-1].role == "user":
                raise RoleAlternationError(
                    f"conversation {conversation_id}: last turn is already a user turn"
                )
            if not extra_user_text:
                raise EmptyTextError("turn text must be nonempty")
            history.append(Turn(index=len(history), role="user", text=extra_user_text))
        elif history and history[-1].role == "bot":
            raise RoleOrderError(
                f"conversation {conversation_id}: last turn is already a bot turn"
            )
        prompt = render_prompt(template, task, history)
        utterance = extract_utterance(
            template, self.backend.complete(prompt, template.generation)
        )
        with self._lock:
            user_turn = None
            if extra_user_text is not None:
                user_turn = self.store.append_turn(conversation_id, "user", extra_user_text)
            try:
                bot_turn = self.store.append_turn(conversation_id, "bot", utterance)
            except BotBenchError:
                if user_turn is not None:  # roll the half-applied pair back
                    self.store._conversation(conversation_id).turns.pop()
                raise
            self._persist()
            return user_turn, bot_turn

    def generate_bot_reply(self, conversation_id: str) -> Turn:
        """Append one generated bot turn; atomic (no turn on any failure)."""
        with self._conversation_lock(conversation_id):
            return self._generate(conversation_id, None)[1]

    def submit_user_turn(self, conversation_id: str, text: str) -> tuple[Turn, Turn]:
        """Collector round-trip: append the user turn and the generated bot
        reply together, or neither."""
        with self._conversation_lock(conversation_id):
            user_turn, bot_turn = self._generate(conversation_id, text)
            assert user_turn is not None
            return user_turn, bot_turn

    def graph_bytes(self, tag: str | None, source: str | None, format: str) -> bytes:
        with self._lock:
            conversations = self.store.filter_conversations(
                source=source, tag_names={tag} if tag else None
            )
        return export_dag(build_dag(conversations), format=format)

    def run_regression(
        self,
        template: ChatbotTemplate,
        tag: str | None = None,
        source: str | None = None,
        polarity: str | None = None,
        mode: str = "individual",
    ) -> RegressionReport:
        # Replay against a snapshot so long LM calls never block collection
        # and stored conversations provably stay untouched.
        with self._lock:
            snapshot = copy.deepcopy(self.store)
        return run_regression(
            snapshot,
            template,
            self.backend,
            tag_names={tag} if tag else None,
            source=source,
            polarity=polarity,
            mode=mode,
            reports_dir=reports_dir(self.store_dir),
        )

    def reports(self) -> list[dict]:
        return list_reports(reports_dir(self.store_dir))

    def report_bytes(self, report_id: str) -> bytes:
        if "/" in report_id or "\\" in report_id or report_id in (".", ".."):
            raise UnknownReportError(f"no report {report_id!r}")
        path = reports_dir(self.store_dir) / f"{report_id}.json"
        if not path.is_file():
            raise UnknownReportError(f"no report {report_id!r}")
        return path.read_bytes()


class ConversationCreate(BaseModel):
    task_id: str
    template_id: str
    source: str = "web"


class TurnSubmission(BaseModel):
    text: str


class ForkRequest(BaseModel):
    turn_index: int


class TagRequest(BaseModel):
    name: str
    polarity: str = "error"
    note: str | None = None


class RegressionRequest(BaseModel):
    template: dict
    tag: str | None = None
    source: str | None = None
    polarity: str | None = None
    mode: str = "individual"


def create_app(config: ServiceConfig, backend: CompletionBackend | None = None) -> FastAPI:
    """Build the FastAPI app owning one store directory. A backend instance
    may be injected (tests); otherwise it is built from config.lm_backend."""
    config.validate()
    bench = Workbench(config.store_path, backend or backend_from_spec(config.lm_backend))
    app = FastAPI(title="botbench", version=__version__)
    app.state.workbench = bench

    @app.exception_handler(BotBenchError)
    async def _domain_error(request: Request, exc: BotBenchError):
        return JSONResponse(
            status_code=status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"error": "ValueError", "detail": str(exc)}
        )

    @app.get("/tasks")
    def list_tasks():
        return [t.to_dict() for t in bench.store.list_tasks()]

    @app.post("/tasks")
    def create_task(body: dict):
        if not body.get("id"):
            body = dict(body, id=new_id())
        task = Task.from_dict(body)
        return bench.mutate(lambda s: s.add_task(task)).to_dict()

    @app.get("/templates")
    def list_templates():
        return [t.to_dict() for t in bench.store.list_templates()]

    @app.post("/templates")
    def create_template(body: dict):
        template = ChatbotTemplate.from_dict(body)
        violations = validate_template(template)
        if violations:
            raise InvalidTemplateError("; ".join(str(v) for v in violations))
        return bench.mutate(lambda s: s.add_template(template)).to_dict()

    @app.put("/templates/{template_id}")
    def update_template(template_id: str, body: dict):
        template = ChatbotTemplate.from_dict(dict(body, id=template_id))
        violations = validate_template(template)
        if violations:
            raise InvalidTemplateError("; ".join(str(v) for v in violations))
        return bench.mutate(lambda s: s.replace_template(template)).to_dict()

    @app.get("/conversations")
    def list_conversations(tag: str | None = None, source: str | None = None):
        conversations = bench.store.filter_conversations(
            source=source, tag_names={tag} if tag else None
        )
        return [c.to_dict() for c in conversations]

    @app.post("/conversations")
    def create_conversation(body: ConversationCreate):
        return bench.mutate(
            lambda s: s.create_conversation(body.task_id, body.template_id, body.source)
        ).to_dict()

    @app.get("/conversations/{conversation_id}")
    def get_conversation(conversation_id: str):
        return bench.store.get_conversation(conversation_id).to_dict()

    @app.post("/conversations/{conversation_id}/turns")
    def submit_turn(conversation_id: str, body: TurnSubmission):
        user_turn, bot_turn = bench.submit_user_turn(conversation_id, body.text)
        return {"user_turn": user_turn.to_dict(), "bot_turn": bot_turn.to_dict()}

    @app.post("/conversations/{conversation_id}/fork")
    def fork_conversation(conversation_id: str, body: ForkRequest):
        return bench.mutate(
            lambda s: s.fork_conversation(conversation_id, body.turn_index)
        ).to_dict()

    @app.post("/conversations/{conversation_id}/turns/{turn_index}/tags")
    def add_tag(conversation_id: str, turn_index: int, body: TagRequest):
        tag = Tag(name=body.name, polarity=body.polarity, note=body.note)
        return bench.mutate(lambda s: s.add_tag(conversation_id, turn_index, tag)).to_dict()

    @app.delete("/conversations/{conversation_id}/turns/{turn_index}/tags/{name}")
    def remove_tag(conversation_id: str, turn_index: int, name: str):
        return bench.mutate(
            lambda s: s.remove_tag(conversation_id, turn_index, name)
        ).to_dict()

    @app.get("/graph")
    def get_graph(
        tag: str | None = None,
        source: str | None = None,
        format: str = Query("json", pattern="^(json|dot)$"),
    ):
        payload = bench.graph_bytes(tag, source, format)
        media = "application/json" if format == "json" else "text/vnd.graphviz"
        return Response(content=payload, media_type=media)

    @app.get("/regression/cases")
    def regression_cases(
        tag: str | None = None,
        source: str | None = None,
        polarity: str | None = None,
    ):
        with bench._lock:
            cases = collect_cases(
                bench.store,
                tag_names={tag} if tag else None,
                source=source,
                polarity=polarity,
            )
            originals = {
                (c.conversation_id, c.turn_index): bench.store.get_conversation(
                    c.conversation_id
                ).turns[c.turn_index].text
                for c in cases
            }
        return [
            {
                "conversation_id": c.conversation_id,
                "turn_index": c.turn_index,
                "tag_names": c.tag_names,
                "original": originals[(c.conversation_id, c.turn_index)],
                "context_before": [{"role": t.role, "text": t.text} for t in c.context_before],
                "context_after": [{"role": t.role, "text": t.text} for t in c.context_after],
            }
            for c in cases
        ]

    @app.post("/regression/run")
    def regression_run(body: RegressionRequest):
        template = ChatbotTemplate.from_dict(body.template)
        report = bench.run_regression(
            template, tag=body.tag, source=body.source, polarity=body.polarity, mode=body.mode
        )
        return json.loads(report.to_json())

    @app.get("/reports")
    def reports():
        return bench.reports()

    @app.get("/reports/{report_id}")
    def report(report_id: str):
        return Response(content=bench.report_bytes(report_id), media_type="application/json")

    _mount_frontend(app)
    return app


def _mount_frontend(app: FastAPI) -> None:
    """Serve the web UI bundle at /ui when one is available: either where
    BOTBENCH_UI_DIST points, or frontend/dist next to a source checkout.
    API-only deployments simply skip this."""
    import os

    candidates = []
    if os.environ.get("BOTBENCH_UI_DIST"):
        candidates.append(Path(os.environ["BOTBENCH_UI_DIST"]))
    candidates.append(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    for dist in candidates:
        if dist.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/ui", StaticFiles(directory=dist, html=True), name="ui")
            return


def serve(config: ServiceConfig, backend: CompletionBackend | None = None) -> None:
    import uvicorn

    app = create_app(config, backend)
    uvicorn.run(app, host="127.0.0.1", port=config.port)
