"""Gateway retry/error behaviour (mock transport) and the scripted backend."""

from __future__ import annotations

import hashlib
import json

import httpx
import pytest

from lfforge.gateway import (
    AuthError,
    BadRequestError,
    ChatMessage,
    GatewayConfig,
    MalformedResponseError,
    OpenAiGateway,
    ScriptExhaustedError,
    ScriptMismatchError,
    ScriptedMockGateway,
    TransportError,
)


def chat_body(content=None, tool_calls=None):
    message = {"role": "assistant", "content": content}
    if tool_calls:
        message["tool_calls"] = tool_calls
    return {"choices": [{"message": message}], "usage": {"total_tokens": 7}}


def make_gateway(handler, **cfg_kwargs) -> OpenAiGateway:
    cfg = GatewayConfig(base_url="http://llm.test/v1", api_key="sk-secret", **cfg_kwargs)
    return OpenAiGateway(cfg, transport=httpx.MockTransport(handler))


SYSTEM = ChatMessage(role="system", content="sys")
USER = ChatMessage(role="user", content="hello")


class TestChat:
    def test_content_response(self):
        def handler(request):
            payload = json.loads(request.content)
            assert payload["model"] == "o4-mini"
            assert payload["messages"][0]["role"] == "system"
            return httpx.Response(200, json=chat_body(content="hi"))

        response = make_gateway(handler).chat([SYSTEM, USER], [])
        assert response.content == "hi"
        assert not response.wants_tools
        assert response.usage == {"total_tokens": 7}

    def test_tool_call_response(self):
        calls = [{"id": "c1", "function": {"name": "createTimer", "arguments": "{}"}}]

        def handler(request):
            return httpx.Response(200, json=chat_body(tool_calls=calls))

        response = make_gateway(handler).chat([SYSTEM, USER], [])
        assert response.wants_tools
        assert response.tool_calls[0].name == "createTimer"

    def test_empty_messages_rejected_locally(self):
        gateway = make_gateway(lambda request: httpx.Response(200, json=chat_body("x")))
        with pytest.raises(BadRequestError):
            gateway.chat([], [])
        with pytest.raises(BadRequestError):
            gateway.chat([USER], [])  # first message must be the system prompt

    def test_transport_errors_retried(self, monkeypatch):
        monkeypatch.setattr("lfforge.gateway.time.sleep", lambda s: None)
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 3:
                raise httpx.ConnectError("refused")
            return httpx.Response(200, json=chat_body("recovered"))

        response = make_gateway(handler, max_retries=2).chat([SYSTEM, USER], [])
        assert response.content == "recovered"
        assert len(attempts) == 3

    def test_retries_capped(self, monkeypatch):
        monkeypatch.setattr("lfforge.gateway.time.sleep", lambda s: None)
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ConnectError("refused")

        with pytest.raises(TransportError):
            make_gateway(handler, max_retries=2).chat([SYSTEM, USER], [])
        assert len(attempts) == 3  # initial try + 2 retries

    def test_500_retried(self, monkeypatch):
        monkeypatch.setattr("lfforge.gateway.time.sleep", lambda s: None)
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) == 1:
                return httpx.Response(503)
            return httpx.Response(200, json=chat_body("ok"))

        assert make_gateway(handler, max_retries=1).chat([SYSTEM, USER], []).content == "ok"

    def test_401_never_retried(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(401)

        with pytest.raises(AuthError):
            make_gateway(handler, max_retries=5).chat([SYSTEM, USER], [])
        assert len(attempts) == 1

    def test_422_never_retried(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(422)

        with pytest.raises(BadRequestError):
            make_gateway(handler, max_retries=5).chat([SYSTEM, USER], [])
        assert len(attempts) == 1

    def test_malformed_body(self):
        def handler(request):
            return httpx.Response(200, json={"nonsense": True})

        with pytest.raises(MalformedResponseError):
            make_gateway(handler).chat([SYSTEM, USER], [])

    def test_api_key_not_in_errors_or_repr(self):
        def handler(request):
            return httpx.Response(401)

        gateway = make_gateway(handler)
        assert "sk-secret" not in repr(gateway.cfg)
        try:
            gateway.chat([SYSTEM, USER], [])
        except AuthError as exc:
            assert "sk-secret" not in str(exc)

    def test_api_key_never_reaches_persisted_artifacts(self, registry, tmp_path):
        from lfforge.orchestrator import Orchestrator, SessionStore

        def handler(request):
            content = "```lf\ntarget C;\nmain reactor {\n}\n```"
            return httpx.Response(200, json=chat_body(content=content))

        gateway = make_gateway(handler)
        orchestrator = Orchestrator(SessionStore(tmp_path), gateway, registry)
        session = orchestrator.create_session()
        orchestrator.submit_prompt(session, "create an empty model")
        for path in tmp_path.rglob("*"):
            if path.is_file():
                assert b"sk-secret" not in path.read_bytes(), path


class TestTranscribe:
    def test_happy_path(self):
        def handler(request):
            assert b"whisper-1" in request.content
            return httpx.Response(200, json={"text": "make a timer"})

        assert make_gateway(handler).transcribe(b"RIFFxx", "audio/wav") == "make a timer"

    def test_language_hint_passthrough(self):
        seen = {}

        def handler(request):
            seen["body"] = request.content
            return httpx.Response(200, json={"text": "ok"})

        make_gateway(handler).transcribe(b"RIFFxx", "audio/wav", language="de")
        assert b"de" in seen["body"]

    def test_empty_payload_rejected_locally(self):
        def handler(request):  # pragma: no cover - must not be reached
            raise AssertionError("no network call expected")

        with pytest.raises(BadRequestError, match="empty"):
            make_gateway(handler).transcribe(b"", "audio/wav")

    def test_unsupported_media_type_rejected_locally(self):
        def handler(request):  # pragma: no cover - must not be reached
            raise AssertionError("no network call expected")

        with pytest.raises(BadRequestError, match="unsupported media type"):
            make_gateway(handler).transcribe(b"x", "text/plain")


class TestScriptedMock:
    def test_replays_in_order(self):
        mock = ScriptedMockGateway(
            {
                "turns": [
                    {"respond": {"content": "one"}},
                    {"respond": {"tool_calls": [{"name": "createTimer",
                                                 "arguments": {"name": "T"}}]}},
                ]
            }
        )
        first = mock.chat([SYSTEM, USER], [])
        assert first.content == "one"
        second = mock.chat([SYSTEM, USER], [])
        assert second.tool_calls[0].name == "createTimer"
        assert json.loads(second.tool_calls[0].arguments) == {"name": "T"}

    def test_exhaustion(self):
        mock = ScriptedMockGateway({"turns": []})
        with pytest.raises(ScriptExhaustedError):
            mock.chat([SYSTEM, USER], [])

    def test_expect_user_contains_mismatch_shows_diff(self):
        mock = ScriptedMockGateway(
            {"turns": [{"expect_user_contains": "timer", "respond": {"content": "x"}}]}
        )
        with pytest.raises(ScriptMismatchError) as excinfo:
            mock.chat([SYSTEM, ChatMessage(role="user", content="make a reactor")], [])
        assert "expected to contain" in str(excinfo.value)
        assert "timer" in str(excinfo.value)

    def test_expect_tool_results_verbatim(self):
        mock = ScriptedMockGateway(
            {
                "turns": [
                    {
                        "expect_tool_results": ["timer T(100 ms, 1 s);"],
                        "respond": {"content": "done"},
                    }
                ]
            }
        )
        messages = [
            SYSTEM,
            USER,
            ChatMessage(role="assistant", content=""),
            ChatMessage(role="tool", content="timer T(100 ms, 1 s);", tool_call_id="c1"),
        ]
        assert mock.chat(messages, []).content == "done"

    def test_expect_tool_results_mismatch(self):
        mock = ScriptedMockGateway(
            {"turns": [{"expect_tool_results": ["timer T(0);"], "respond": {"content": "x"}}]}
        )
        messages = [
            SYSTEM,
            USER,
            ChatMessage(role="tool", content="timer WRONG;", tool_call_id="c1"),
        ]
        with pytest.raises(ScriptMismatchError) as excinfo:
            mock.chat(messages, [])
        assert "expected[0]" in str(excinfo.value)

    def test_transcripts_by_hash(self):
        audio = b"some-audio"
        mock = ScriptedMockGateway(
            {"turns": [], "transcripts": {hashlib.sha256(audio).hexdigest(): "hello world"}}
        )
        assert mock.transcribe(audio, "audio/webm") == "hello world"
        with pytest.raises(ScriptMismatchError):
            mock.transcribe(b"other", "audio/webm")

    def test_mock_shares_local_audio_preconditions(self):
        mock = ScriptedMockGateway({"turns": []})
        with pytest.raises(BadRequestError):
            mock.transcribe(b"", "audio/wav")
        with pytest.raises(BadRequestError):
            mock.transcribe(b"x", "text/plain")

    def test_determinism(self, demo_script_path):
        def run():
            mock = ScriptedMockGateway.from_file(demo_script_path)
            response = mock.chat([SYSTEM, ChatMessage(role="user",
                                                      content="empty main reactor please")], [])
            return response.content

        assert run() == run()


def test_config_invariants():
    with pytest.raises(ValueError):
        GatewayConfig(timeout=0)
    with pytest.raises(ValueError):
        GatewayConfig(max_retries=-1)
