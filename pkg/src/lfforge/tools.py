"""Registry and executor for the functions exposed to the LLM.

Execution never raises on bad calls: unknown tools, malformed JSON, missing
required arguments, and type mismatches all come back as error payloads so
the chat loop can hand them to the model as corrective feedback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .lf.ast import Diagnostic, diagnostics_to_json
from .toolgen import ParamSpec, SyntaxTemplate, ToolSchema


class SessionView(Protocol):
    """Read-only slice of session state that introspection tools may see."""

    @property
    def current_model_text(self) -> str: ...

    @property
    def last_diagnostics(self) -> list[Diagnostic]: ...


@dataclass(frozen=True)
class ToolCall:
    id: str
    name: str
    arguments: str  # JSON object text, as it arrives on the wire

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "type": "function",
            "function": {"name": self.name, "arguments": self.arguments},
        }


@dataclass(frozen=True)
class ToolResult:
    call_id: str
    name: str
    payload: str
    is_error: bool = False

    def to_message(self) -> dict:
        return {"role": "tool", "tool_call_id": self.call_id, "content": self.payload}


Executor = Callable[[dict, "SessionView"], str]


class DuplicateToolError(ValueError):
    pass


@dataclass
class _Entry:
    schema: ToolSchema
    template: SyntaxTemplate | None
    builtin: Executor | None


class ToolRegistry:
    """Immutable-after-setup mapping from function name to schema + executor."""

    def __init__(self) -> None:
        self._entries: dict[str, _Entry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return list(self._entries)

    def schema(self, name: str) -> ToolSchema | None:
        entry = self._entries.get(name)
        return entry.schema if entry else None

    def template(self, name: str) -> SyntaxTemplate | None:
        entry = self._entries.get(name)
        return entry.template if entry else None

    def register(self, schema: ToolSchema, template: SyntaxTemplate) -> "ToolRegistry":
        if schema.name in self._entries:
            raise DuplicateToolError(f"tool '{schema.name}' is already registered")
        self._entries[schema.name] = _Entry(schema, template, None)
        return self

    def register_builtin(self, schema: ToolSchema, fn: Executor) -> "ToolRegistry":
        if schema.name in self._entries:
            raise DuplicateToolError(f"tool '{schema.name}' is already registered")
        self._entries[schema.name] = _Entry(schema, None, fn)
        return self

    def list_tools(self) -> list[dict]:
        """Wire-format definitions in registration order."""
        return [entry.schema.to_wire() for entry in self._entries.values()]

    def execute(self, call: ToolCall, context: SessionView) -> ToolResult:
        entry = self._entries.get(call.name)
        if entry is None:
            return _error(call, f"unknown tool: {call.name}")
        try:
            args = json.loads(call.arguments) if call.arguments.strip() else {}
        except json.JSONDecodeError as exc:
            return _error(call, f"invalid arguments JSON: {exc}")
        if not isinstance(args, dict):
            return _error(call, "arguments must be a JSON object")
        problem = _check_args(entry.schema, args)
        if problem is not None:
            return _error(call, problem)
        if entry.builtin is not None:
            return ToolResult(call.id, call.name, entry.builtin(args, context))
        assert entry.template is not None
        return ToolResult(call.id, call.name, entry.template.render(args))


def _error(call: ToolCall, message: str) -> ToolResult:
    return ToolResult(call.id, call.name, f"error: {message}", is_error=True)


def _check_args(schema: ToolSchema, args: dict) -> str | None:
    for param in schema.parameters:
        if param.name not in args or args[param.name] is None:
            if not param.optional:
                return f"missing required argument: {param.name}"
            continue
        mismatch = _type_mismatch(param, args[param.name])
        if mismatch:
            return mismatch
    return None


def _type_mismatch(param: ParamSpec, value: object) -> str | None:
    expected = param.json_type
    if expected == "string" and not isinstance(value, str):
        return f"type mismatch for argument {param.name}: expected string"
    if expected == "integer" and (isinstance(value, bool) or not isinstance(value, int)):
        return f"type mismatch for argument {param.name}: expected integer"
    if expected == "boolean" and not isinstance(value, bool):
        return f"type mismatch for argument {param.name}: expected boolean"
    if expected == "array-of-string":
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            return f"type mismatch for argument {param.name}: expected array of strings"
    return None


# -- built-in introspection tools ----------------------------------------------


def _no_param_schema(name: str, description: str, returns_desc: str) -> ToolSchema:
    return ToolSchema(
        name=name, description=description, parameters=(), returns=("string", returns_desc)
    )


GET_CURRENT_MODEL = _no_param_schema(
    "getCurrentModel",
    "Returns the full text of the current model.",
    "The current model source text; empty if no model exists yet.",
)

GET_DIAGNOSTICS = _no_param_schema(
    "getDiagnostics",
    "Returns the validation diagnostics of the current model as JSON.",
    "A JSON array of diagnostics with severity, code, message, and range.",
)


def _get_current_model(_args: dict, context: SessionView) -> str:
    return context.current_model_text


def _get_diagnostics(_args: dict, context: SessionView) -> str:
    return json.dumps(diagnostics_to_json(context.last_diagnostics))


def add_builtin_tools(registry: ToolRegistry) -> ToolRegistry:
    registry.register_builtin(GET_CURRENT_MODEL, _get_current_model)
    registry.register_builtin(GET_DIAGNOSTICS, _get_diagnostics)
    return registry


def build_registry(pairs: list[tuple[ToolSchema, SyntaxTemplate]], builtins: bool = True) -> ToolRegistry:
    registry = ToolRegistry()
    for schema, template in pairs:
        registry.register(schema, template)
    if builtins:
        add_builtin_tools(registry)
    return registry


@dataclass
class StaticSessionView:
    """Plain-data SessionView, handy for tests and offline rendering."""

    current_model_text: str = ""
    last_diagnostics: list[Diagnostic] = field(default_factory=list)
