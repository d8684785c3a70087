"""The refinement loop: session state, turn execution, and persistence.

A turn goes input -> prompt -> chat/tool rounds -> model text -> parse ->
validate -> diagram, recording what every stage produced (transcript, model
text, diagnostics, diagram artifacts) plus per-stage timings. Failed turns
are recorded but never change the current model.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .diagram import synthesize, render_json, render_svg
from .gateway import AssistantResponse, ChatMessage, GatewayError
from .layout import LayoutConfig, layout
from .lf.ast import Diagnostic, Model, Span
from .lf.parser import parse_model
from .lf.validator import validate
from .tools import ToolCall, ToolRegistry, ToolResult

DEFAULT_SYSTEM_PROMPT = """\
You are a modeling assistant for a reactor-based coordination language.
A model consists of a mandatory `target <Language>;` declaration followed by
reactor definitions. Exactly one reactor is marked `main`. Inside a reactor
you may declare: `input name: type;`, `output name: type;`,
`timer name(offset, period);` (times are 0 or an integer with a unit such as
ms or s), `state name: type = value;`, reactions
`reaction(trigger, ...) -> effect, ... {= host code =}`, child instances
`name = new ReactorClass();`, and connections `a.out -> b.in;`.

When you are unsure of the concrete syntax for an element, call the matching
create* tool and use exactly the snippet it returns. You can inspect the
live state with getCurrentModel and getDiagnostics.

Always answer with the complete updated model in a single fenced code block;
do not answer with fragments or prose-only replies.
"""


class ToolLoopLimitError(Exception):
    pass


@dataclass(frozen=True)
class SessionConfig:
    auto_send: bool = False
    include_history: int = 0
    auto_repair: bool = False
    max_tool_rounds: int = 8
    system_prompt: str = DEFAULT_SYSTEM_PROMPT

    def __post_init__(self) -> None:
        if self.max_tool_rounds < 1:
            raise ValueError("max_tool_rounds must be at least 1")
        if self.include_history < 0:
            raise ValueError("include_history must be non-negative")


@dataclass
class TurnRecord:
    index: int
    kind: str  # speech | text | edit
    prompt: str
    transcript: str | None = None
    tool_trace: list[tuple[ToolCall, ToolResult]] = field(default_factory=list)
    model_text_after: str = ""
    model_updated: bool = False
    diagnostics: list[Diagnostic] = field(default_factory=list)
    diagram: dict | None = None  # {"svg": relpath, "json": relpath}
    timings: dict = field(default_factory=dict)  # stage -> milliseconds
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class Session:
    id: str
    config: SessionConfig
    current_model_text: str = ""
    current_model: Model | None = None
    turns: list[TurnRecord] = field(default_factory=list)
    pending_transcript: str | None = None
    last_diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.current_model is None:
            result = parse_model(self.current_model_text)
            self.current_model = result.model


class _StageClock:
    def __init__(self, progress_cb, turn_index: int):
        self.timings: dict[str, float] = {}
        self._progress_cb = progress_cb
        self._turn_index = turn_index
        self._stage: str | None = None
        self._started = 0.0

    def enter(self, stage: str) -> None:
        self.leave()
        self._stage = stage
        self._started = time.perf_counter()
        if self._progress_cb:
            self._progress_cb(self._turn_index, stage)

    def leave(self) -> None:
        if self._stage is not None:
            ms = (time.perf_counter() - self._started) * 1000.0
            self.timings[self._stage] = round(self.timings.get(self._stage, 0.0) + ms, 3)
            self._stage = None


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_model_text(content: str) -> str:
    """The largest fenced code block (first on ties), else the whole reply."""
    blocks = _FENCE_RE.findall(content or "")
    if not blocks:
        return (content or "").strip()
    best = max(blocks, key=len)  # max() keeps the first maximum
    return best.strip()


def run_tool_loop(
    gateway,
    messages: list[ChatMessage],
    tools: list[dict],
    registry: ToolRegistry,
    context,
    max_rounds: int,
    clock: _StageClock | None = None,
) -> tuple[str, list[tuple[ToolCall, ToolResult]]]:
    """Chat until the assistant answers with content, executing tool calls
    between rounds. Raises ToolLoopLimitError when max_rounds is exhausted."""
    trace: list[tuple[ToolCall, ToolResult]] = []
    for _ in range(max_rounds):
        if clock:
            clock.enter("chat")
        response: AssistantResponse = gateway.chat(messages, tools)
        if not response.wants_tools:
            if clock:
                clock.leave()
            return response.content or "", trace
        if clock:
            clock.enter("tools")
        messages.append(
            ChatMessage(role="assistant", content="", tool_calls=response.tool_calls)
        )
        for call in response.tool_calls:
            result = registry.execute(call, context)
            trace.append((call, result))
            messages.append(ChatMessage(role="tool", content=result.payload, tool_call_id=call.id))
    raise ToolLoopLimitError(f"assistant kept calling tools after {max_rounds} rounds")


class SessionStore:
    """One JSON file per session plus a sibling artifact directory."""

    def __init__(self, data_dir: Path | str):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)

    def session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def artifact_dir(self, session_id: str) -> Path:
        return self.sessions_dir / session_id

    def save(self, session: Session) -> None:
        payload = {
            "id": session.id,
            "config": asdict(session.config),
            "current_model_text": session.current_model_text,
            "turns": [_turn_to_json(t) for t in session.turns],
        }
        self.session_path(session.id).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    def raw_bytes(self, session_id: str) -> bytes | None:
        path = self.session_path(session_id)
        return path.read_bytes() if path.exists() else None

    def exists(self, session_id: str) -> bool:
        return self.session_path(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.sessions_dir.glob("*.json"))

    def load(self, session_id: str) -> Session | None:
        raw = self.raw_bytes(session_id)
        if raw is None:
            return None
        data = json.loads(raw.decode("utf-8"))
        session = Session(
            id=data["id"],
            config=SessionConfig(**data["config"]),
            current_model_text=data["current_model_text"],
            turns=[_turn_from_json(t) for t in data["turns"]],
        )
        if session.turns:
            session.last_diagnostics = list(session.turns[-1].diagnostics)
        return session

    def write_artifacts(self, session_id: str, turn_index: int, svg: str, spec: str) -> dict:
        directory = self.artifact_dir(session_id)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{turn_index}.svg").write_text(svg, encoding="utf-8")
        (directory / f"{turn_index}.json").write_text(spec, encoding="utf-8")
        return {
            "svg": f"{session_id}/{turn_index}.svg",
            "json": f"{session_id}/{turn_index}.json",
        }

    def read_artifact(self, session_id: str, turn_index: int, fmt: str) -> bytes | None:
        path = self.artifact_dir(session_id) / f"{turn_index}.{fmt}"
        return path.read_bytes() if path.exists() else None


def _turn_to_json(turn: TurnRecord) -> dict:
    return {
        "index": turn.index,
        "kind": turn.kind,
        "prompt": turn.prompt,
        "transcript": turn.transcript,
        "tool_trace": [
            {
                "call": {"id": c.id, "name": c.name, "arguments": c.arguments},
                "result": {"payload": r.payload, "is_error": r.is_error},
            }
            for c, r in turn.tool_trace
        ],
        "model_text_after": turn.model_text_after,
        "model_updated": turn.model_updated,
        "diagnostics": [d.to_json() for d in turn.diagnostics],
        "diagram": turn.diagram,
        "timings": turn.timings,
        "error": turn.error,
    }


def _turn_from_json(data: dict) -> TurnRecord:
    return TurnRecord(
        index=data["index"],
        kind=data["kind"],
        prompt=data["prompt"],
        transcript=data.get("transcript"),
        tool_trace=[
            (
                ToolCall(t["call"]["id"], t["call"]["name"], t["call"]["arguments"]),
                ToolResult(
                    t["call"]["id"],
                    t["call"]["name"],
                    t["result"]["payload"],
                    t["result"]["is_error"],
                ),
            )
            for t in data.get("tool_trace", [])
        ],
        model_text_after=data.get("model_text_after", ""),
        model_updated=data.get("model_updated", False),
        diagnostics=[_diag_from_json(d) for d in data.get("diagnostics", [])],
        diagram=data.get("diagram"),
        timings=data.get("timings", {}),
        error=data.get("error"),
    )


def _diag_from_json(data: dict) -> Diagnostic:
    rng = data.get("range", {})
    return Diagnostic(
        severity=data["severity"],
        code=data["code"],
        message=data["message"],
        span=Span(rng.get("line", 0), rng.get("col", 0), rng.get("length", 0)),
    )


class Orchestrator:
    """Drives turns for any number of sessions; one writer per session."""

    def __init__(
        self,
        store: SessionStore,
        gateway,
        registry: ToolRegistry,
        layout_config: LayoutConfig | None = None,
    ):
        self.store = store
        self.gateway = gateway
        self.registry = registry
        self.layout_config = layout_config or LayoutConfig()
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()
        self._progress: dict[str, dict] = {}

    # -- session management -----------------------------------------------

    def create_session(self, config: SessionConfig | None = None) -> Session:
        if len(self.registry) == 0:
            raise ValueError("tool registry is empty; create sessions after registration")
        session = Session(id=uuid.uuid4().hex[:12], config=config or SessionConfig())
        with self._master:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        self.store.save(session)
        return session

    def get_session(self, session_id: str) -> Session | None:
        with self._master:
            cached = self._sessions.get(session_id)
        if cached is not None:
            return cached
        session = self.store.load(session_id)
        if session is not None:
            with self._master:
                self._sessions.setdefault(session_id, session)
                self._locks.setdefault(session_id, threading.Lock())
        return session

    def _lock(self, session_id: str) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(session_id, threading.Lock())

    def progress(self, session_id: str) -> dict:
        with self._master:
            return dict(self._progress.get(session_id, {"turn": None, "stage": "idle"}))

    def _set_progress(self, session_id: str, turn_index: int, stage: str) -> None:
        with self._master:
            self._progress[session_id] = {"turn": turn_index, "stage": stage}

    # -- interaction points --------------------------------------------------

    def submit_audio(
        self, session: Session, audio: bytes, media_type: str, language: str | None = None
    ) -> tuple[str, TurnRecord | None]:
        """Transcribe and either stash the transcript for confirmation or,
        with auto_send, run the whole turn immediately.

        Returns (transcript, turn) where turn is None while confirmation is
        pending. Gateway errors propagate; the session is left unchanged."""
        with self._lock(session.id):
            index = len(session.turns)
            clock = self._clock(session.id, index)
            clock.enter("transcribe")
            try:
                transcript = self.gateway.transcribe(audio, media_type, language)
            finally:
                clock.leave()
                self._set_progress(session.id, index, "idle")
            session.pending_transcript = transcript
        if session.config.auto_send:
            turn = self.submit_prompt(session, transcript, transcribe_ms=clock.timings.get("transcribe"))
            return transcript, turn
        return transcript, None

    def submit_prompt(
        self, session: Session, prompt: str, transcribe_ms: float | None = None
    ) -> TurnRecord:
        if not prompt.strip():
            raise ValueError("prompt must not be empty")
        with self._lock(session.id):
            kind = "speech" if session.pending_transcript is not None else "text"
            transcript = session.pending_transcript
            session.pending_transcript = None
            turn = self._run_prompt_turn(session, prompt, kind, transcript, transcribe_ms)
            session.turns.append(turn)
            session.last_diagnostics = list(turn.diagnostics)
            self.store.save(session)
            self._set_progress(session.id, turn.index, "done")
            return turn

    def edit_model(self, session: Session, new_text: str) -> TurnRecord:
        """Direct model edit: replaces the text, revalidates, redraws."""
        with self._lock(session.id):
            index = len(session.turns)
            clock = self._clock(session.id, index)
            turn = TurnRecord(index=index, kind="edit", prompt="", model_text_after=new_text)
            clock.enter("parse")
            result = parse_model(new_text)
            session.current_model_text = new_text
            session.current_model = result.model
            if result.ok:
                clock.enter("validate")
                turn.diagnostics = validate(result.model)
                turn.model_updated = True
                turn.diagram = self._render_diagram(session, result.model, index, clock)
            else:
                turn.diagnostics = list(result.diagnostics)
            clock.leave()
            turn.timings = clock.timings
            session.turns.append(turn)
            session.last_diagnostics = list(turn.diagnostics)
            self.store.save(session)
            self._set_progress(session.id, index, "done")
            return turn

    # -- turn internals ---------------------------------------------------------

    def _clock(self, session_id: str, turn_index: int) -> _StageClock:
        return _StageClock(
            lambda idx, stage: self._set_progress(session_id, idx, stage), turn_index
        )

    def _run_prompt_turn(
        self,
        session: Session,
        prompt: str,
        kind: str,
        transcript: str | None,
        transcribe_ms: float | None,
    ) -> TurnRecord:
        index = len(session.turns)
        clock = self._clock(session.id, index)
        if transcribe_ms is not None:
            clock.timings["transcribe"] = round(transcribe_ms, 3)
        turn = TurnRecord(index=index, kind=kind, prompt=prompt, transcript=transcript)
        messages = self._build_messages(session, prompt)
        tools = self.registry.list_tools()
        try:
            content, trace = run_tool_loop(
                self.gateway,
                messages,
                tools,
                self.registry,
                session,
                session.config.max_tool_rounds,
                clock,
            )
            turn.tool_trace = trace
            text = extract_model_text(content)
            parsed, diagnostics = self._parse_and_validate(text, clock)
            if parsed is None and session.config.auto_repair:
                messages.append(ChatMessage(role="assistant", content=content))
                messages.append(
                    ChatMessage(
                        role="user",
                        content="The model does not parse. Fix these diagnostics and resend "
                        "the complete model:\n"
                        + "\n".join(f"- {d.code}: {d.message}" for d in diagnostics),
                    )
                )
                content, extra_trace = run_tool_loop(
                    self.gateway,
                    messages,
                    tools,
                    self.registry,
                    session,
                    session.config.max_tool_rounds,
                    clock,
                )
                turn.tool_trace = trace + extra_trace
                text = extract_model_text(content)
                parsed, diagnostics = self._parse_and_validate(text, clock)
        except (GatewayError, ToolLoopLimitError) as exc:
            clock.leave()
            turn.error = str(exc)
            turn.timings = clock.timings
            return turn
        turn.model_text_after = text
        turn.diagnostics = diagnostics
        if parsed is not None:
            session.current_model_text = text
            session.current_model = parsed
            turn.model_updated = True
        if session.current_model is not None:
            turn.diagram = self._render_diagram(session, session.current_model, index, clock)
        clock.leave()
        turn.timings = clock.timings
        return turn

    def _parse_and_validate(
        self, text: str, clock: _StageClock
    ) -> tuple[Model | None, list[Diagnostic]]:
        clock.enter("parse")
        result = parse_model(text)
        if not result.ok:
            clock.leave()
            return None, list(result.diagnostics)
        clock.enter("validate")
        diagnostics = validate(result.model)
        clock.leave()
        return result.model, diagnostics

    def _render_diagram(
        self, session: Session, model: Model, index: int, clock: _StageClock
    ) -> dict:
        clock.enter("synthesize")
        graph = synthesize(model)
        clock.enter("layout")
        laid_out = layout(graph, self.layout_config)
        clock.enter("render")
        svg = render_svg(laid_out)
        spec = render_json(laid_out)
        clock.leave()
        return self.store.write_artifacts(session.id, index, svg, spec)

    def _build_messages(self, session: Session, prompt: str) -> list[ChatMessage]:
        messages = [ChatMessage(role="system", content=session.config.system_prompt)]
        history = session.config.include_history
        if history > 0:
            llm_turns = [t for t in session.turns if t.kind in ("speech", "text") and not t.failed]
            for turn in llm_turns[-history:]:
                messages.append(ChatMessage(role="user", content=turn.prompt))
                messages.append(
                    ChatMessage(
                        role="assistant",
                        content=f"```lf\n{turn.model_text_after}\n```",
                    )
                )
        messages.append(
            ChatMessage(
                role="user",
                content=f"{prompt}\n\nCurrent model:\n```lf\n{session.current_model_text}\n```",
            )
        )
        return messages
