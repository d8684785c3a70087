"""Clients for OpenAI-compatible chat-completion and transcription endpoints,
plus a deterministic scripted backend for tests and offline replays.

The two backends are interchangeable: anything that needs a model takes an
object with `chat(messages, tools)` and `transcribe(audio, media_type,
language)` and does not care which one it got.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from itertools import zip_longest
from pathlib import Path

import httpx

from .tools import ToolCall

SUPPORTED_AUDIO = ("audio/wav", "audio/webm", "audio/ogg")

_BACKOFF_BASE = 0.5
_BACKOFF_FACTOR = 2.0
_BACKOFF_JITTER = 0.2


class GatewayError(Exception):
    """Base for everything the gateway can fail with."""


class TransportError(GatewayError):
    pass


class AuthError(GatewayError):
    pass


class BadRequestError(GatewayError):
    pass


class MalformedResponseError(GatewayError):
    pass


class ScriptMismatchError(GatewayError):
    """The scripted backend saw an interaction the script does not expect."""


class ScriptExhaustedError(GatewayError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant | tool
    content: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None

    def to_wire(self) -> dict:
        msg: dict = {"role": self.role, "content": self.content}
        if self.tool_calls:
            msg["tool_calls"] = [c.to_wire() for c in self.tool_calls]
        if self.tool_call_id is not None:
            msg["tool_call_id"] = self.tool_call_id
        return msg


@dataclass(frozen=True)
class AssistantResponse:
    content: str | None = None
    tool_calls: tuple[ToolCall, ...] = ()
    usage: dict | None = None

    @property
    def wants_tools(self) -> bool:
        return bool(self.tool_calls)


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key: str = ""
    chat_model: str = "o4-mini"
    transcription_model: str = "whisper-1"
    timeout: float = 60.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")

    def __repr__(self) -> str:  # keep the key out of logs and tracebacks
        return (
            f"GatewayConfig(base_url={self.base_url!r}, api_key='***', "
            f"chat_model={self.chat_model!r}, transcription_model={self.transcription_model!r}, "
            f"timeout={self.timeout}, max_retries={self.max_retries})"
        )


def _check_audio(audio: bytes, media_type: str) -> None:
    if not audio:
        raise BadRequestError("audio payload is empty")
    if media_type not in SUPPORTED_AUDIO:
        raise BadRequestError(
            f"unsupported media type {media_type!r}; expected one of {', '.join(SUPPORTED_AUDIO)}"
        )


class OpenAiGateway:
    """Blocking client with capped exponential-backoff retries on transport
    errors and 5xx; 4xx never retries."""

    def __init__(self, cfg: GatewayConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        self._client = httpx.Client(
            base_url=cfg.base_url,
            timeout=cfg.timeout,
            headers={"Authorization": f"Bearer {cfg.api_key}"},
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def chat(self, messages: list[ChatMessage], tools: list[dict]) -> AssistantResponse:
        if not messages:
            raise BadRequestError("messages must not be empty")
        if messages[0].role != "system":
            raise BadRequestError("first message must be the system prompt")
        payload: dict = {
            "model": self.cfg.chat_model,
            "messages": [m.to_wire() for m in messages],
        }
        if tools:
            payload["tools"] = tools
        body = self._post_with_retries("/chat/completions", json_body=payload)
        return _parse_chat_response(body)

    def transcribe(self, audio: bytes, media_type: str, language: str | None = None) -> str:
        _check_audio(audio, media_type)
        data = {"model": self.cfg.transcription_model}
        if language:
            data["language"] = language
        files = {"file": ("audio" + _ext(media_type), audio, media_type)}
        body = self._post_with_retries("/audio/transcriptions", data=data, files=files)
        text = body.get("text")
        if not isinstance(text, str):
            raise MalformedResponseError("transcription response has no 'text' field")
        return text

    def _post_with_retries(
        self, path: str, json_body: dict | None = None, data: dict | None = None, files=None
    ) -> dict:
        attempts = self.cfg.max_retries + 1
        last: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                delay = _BACKOFF_BASE * (_BACKOFF_FACTOR ** (attempt - 1))
                delay *= 1 + random.uniform(-_BACKOFF_JITTER, _BACKOFF_JITTER)
                time.sleep(delay)
            try:
                response = self._client.post(path, json=json_body, data=data, files=files)
            except httpx.TimeoutException as exc:
                last = TransportError(f"request to {path} timed out")
                last.__cause__ = exc
                continue
            except httpx.HTTPError as exc:
                last = TransportError(f"transport failure on {path}: {exc.__class__.__name__}")
                last.__cause__ = exc
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"authentication failed ({response.status_code})")
            if 400 <= response.status_code < 500:
                raise BadRequestError(f"request rejected ({response.status_code})")
            if response.status_code >= 500:
                last = TransportError(f"server error ({response.status_code})")
                continue
            try:
                return response.json()
            except (json.JSONDecodeError, ValueError) as exc:
                raise MalformedResponseError(f"response body is not JSON: {exc}") from exc
        assert last is not None
        raise last


def _ext(media_type: str) -> str:
    return {"audio/wav": ".wav", "audio/webm": ".webm", "audio/ogg": ".ogg"}[media_type]


def _parse_chat_response(body: dict) -> AssistantResponse:
    try:
        message = body["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedResponseError("chat response has no choices[0].message") from exc
    calls = []
    for raw in message.get("tool_calls") or []:
        try:
            calls.append(
                ToolCall(
                    id=raw["id"],
                    name=raw["function"]["name"],
                    arguments=raw["function"]["arguments"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError("malformed tool call in chat response") from exc
    return AssistantResponse(
        content=message.get("content"),
        tool_calls=tuple(calls),
        usage=body.get("usage"),
    )


# -- scripted backend ---------------------------------------------------------


@dataclass
class ScriptTurn:
    respond_content: str | None = None
    respond_tool_calls: list[dict] = field(default_factory=list)
    expect_user_contains: str | None = None
    expect_tool_results: list[str] | None = None


class ScriptedMockGateway:
    """Replays a fixed conversation and checks the caller's side of it.

    Script file shape:
      {
        "turns": [
          {"expect_user_contains": "...",          # substring of last user msg
           "expect_tool_results": ["..."],          # exact recent tool payloads
           "respond": {"content": "..."}            # or {"tool_calls": [...]}
          }, ...
        ],
        "transcripts": {"<sha256 of audio>": "text", ...}
      }
    """

    def __init__(self, script: dict):
        self.turns = [
            ScriptTurn(
                respond_content=turn.get("respond", {}).get("content"),
                respond_tool_calls=turn.get("respond", {}).get("tool_calls", []),
                expect_user_contains=turn.get("expect_user_contains"),
                expect_tool_results=turn.get("expect_tool_results"),
            )
            for turn in script.get("turns", [])
        ]
        self.transcripts: dict[str, str] = dict(script.get("transcripts", {}))
        self.cursor = 0
        self._lock = threading.Lock()  # sessions may share one scripted backend

    @classmethod
    def from_file(cls, path: Path | str) -> "ScriptedMockGateway":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def chat(self, messages: list[ChatMessage], tools: list[dict]) -> AssistantResponse:
        if not messages:
            raise BadRequestError("messages must not be empty")
        with self._lock:
            if self.cursor >= len(self.turns):
                raise ScriptExhaustedError(
                    f"script exhausted after {len(self.turns)} turns; unexpected chat call"
                )
            turn = self.turns[self.cursor]
            self.cursor += 1
        self._check_expectations(turn, messages)
        if turn.respond_tool_calls:
            calls = tuple(
                ToolCall(
                    id=f"call_{self.cursor}_{i}",
                    name=c["name"],
                    arguments=json.dumps(c.get("arguments", {})),
                )
                for i, c in enumerate(turn.respond_tool_calls)
            )
            return AssistantResponse(tool_calls=calls)
        return AssistantResponse(content=turn.respond_content or "")

    def _check_expectations(self, turn: ScriptTurn, messages: list[ChatMessage]) -> None:
        if turn.expect_user_contains is not None:
            user = next((m for m in reversed(messages) if m.role == "user"), None)
            got = user.content if user else "<no user message>"
            if turn.expect_user_contains not in got:
                raise ScriptMismatchError(
                    "user message mismatch:\n"
                    f"  expected to contain: {turn.expect_user_contains!r}\n"
                    f"  actual: {got!r}"
                )
        if turn.expect_tool_results is not None:
            recent: list[str] = []
            for msg in reversed(messages):
                if msg.role == "tool":
                    recent.append(msg.content)
                else:
                    break
            recent.reverse()
            if recent != turn.expect_tool_results:
                diff = "\n".join(
                    f"  expected[{i}]: {e!r}\n  actual[{i}]:   {a!r}"
                    for i, (e, a) in enumerate(
                        zip_longest(turn.expect_tool_results, recent, fillvalue="<missing>")
                    )
                )
                raise ScriptMismatchError(f"tool results mismatch:\n{diff}")

    def transcribe(self, audio: bytes, media_type: str, language: str | None = None) -> str:
        _check_audio(audio, media_type)
        digest = hashlib.sha256(audio).hexdigest()
        if digest not in self.transcripts:
            raise ScriptMismatchError(f"no scripted transcript for audio sha256 {digest}")
        return self.transcripts[digest]
