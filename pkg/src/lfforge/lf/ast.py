"""AST for the Lingua Franca subset handled by the workbench.

All nodes are frozen dataclasses with tuple-valued collections, so parsed
models can be shared freely between threads and sessions. Source locations
(`span`) and the originating text (`source_text`) are excluded from equality:
two models are equal iff they are structurally equal, regardless of where
they were parsed from.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """Source region: 0-based line/column of the start plus character length.

    The length is counted in characters from the start offset and may cross
    line boundaries.
    """

    line: int = 0
    col: int = 0
    length: int = 0

    def to_json(self) -> dict:
        return {"line": self.line, "col": self.col, "length": self.length}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str
    span: Span = field(default_factory=Span)

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "range": self.span.to_json(),
        }


def diagnostics_to_json(diags: list[Diagnostic] | tuple[Diagnostic, ...]) -> list[dict]:
    return [d.to_json() for d in diags]


@dataclass(frozen=True)
class TimeExpr:
    """A timer offset/period (or state initializer) expression.

    `text` is the canonical rendering. When the expression is an integer with
    an optional unit, `value`/`unit` are populated; anything else (for example
    a parameter reference) keeps them None and survives as raw text so that
    validation, not parsing, rejects it.
    """

    text: str
    value: int | None = None
    unit: str | None = None
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Ref:
    """A trigger/effect/connection endpoint: `name` or `container.name`."""

    container: str | None
    name: str
    span: Span = field(default_factory=Span, compare=False)

    @property
    def text(self) -> str:
        return f"{self.container}.{self.name}" if self.container else self.name


@dataclass(frozen=True)
class HostCode:
    """Opaque target-language code; `text` is everything between the
    delimiters, byte for byte, and is never tokenized."""

    text: str


@dataclass(frozen=True)
class Input:
    name: str
    type: str | None = None
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Output:
    name: str
    type: str | None = None
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Timer:
    name: str
    offset: TimeExpr | None = None
    period: TimeExpr | None = None
    label: str | None = None  # retained from @label("..."); other attributes dropped
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class State:
    name: str
    type: str | None = None
    init: TimeExpr | None = None
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Reaction:
    triggers: tuple[Ref, ...] = ()
    effects: tuple[Ref, ...] = ()
    body: HostCode = HostCode("")
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Instantiation:
    name: str
    reactor: str
    args: tuple[tuple[str, str], ...] = ()  # (param name, raw value text)
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Connection:
    source: Ref
    target: Ref
    span: Span = field(default_factory=Span, compare=False)


Element = Input | Output | Timer | State | Reaction | Instantiation | Connection


@dataclass(frozen=True)
class Param:
    name: str
    type: str | None = None
    default: str | None = None  # raw literal text


@dataclass(frozen=True)
class ReactorDef:
    name: str
    is_main: bool = False
    params: tuple[Param, ...] = ()
    elements: tuple[Element, ...] = ()
    span: Span = field(default_factory=Span, compare=False)

    @property
    def reactions(self) -> tuple[Reaction, ...]:
        """Reactions in source order; ordinal i+1 labels the i-th entry."""
        return tuple(e for e in self.elements if isinstance(e, Reaction))


@dataclass(frozen=True)
class TargetDecl:
    """Standalone `target X;` fragment, used when parsing tool snippets."""

    name: str
    span: Span = field(default_factory=Span, compare=False)


@dataclass(frozen=True)
class Model:
    target: str | None = None
    reactors: tuple[ReactorDef, ...] = ()
    source_text: str = field(default="", compare=False)

    def reactor(self, name: str) -> ReactorDef | None:
        for r in self.reactors:
            if r.name == name:
                return r
        return None

    @property
    def main_reactor(self) -> ReactorDef | None:
        for r in self.reactors:
            if r.is_main:
                return r
        return None


_KIND_NAMES = {"ReactorDef": "reactor", "TargetDecl": "target"}


def element_kind(node: object) -> str:
    """Lower-case kind tag for any parseable fragment (element, reactor, target)."""
    name = type(node).__name__
    return _KIND_NAMES.get(name, name.lower())
