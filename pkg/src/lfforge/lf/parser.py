"""Recursive-descent parser for the Lingua Franca subset.

Recovery is per element: a syntax error inside a reactor body skips ahead to
the next plausible element start (or the closing brace) and keeps going, so a
single bad line in LLM output still yields diagnostics for everything else.
Success means zero error diagnostics; only then is a Model produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    Connection,
    Diagnostic,
    Element,
    HostCode,
    Input,
    Instantiation,
    Model,
    Output,
    Param,
    Reaction,
    ReactorDef,
    Ref,
    Span,
    State,
    TargetDecl,
    TimeExpr,
    Timer,
    element_kind,
)
from .lexer import Token, tokenize

ELEMENT_KEYWORDS = frozenset({"input", "output", "timer", "state", "reaction"})
TOP_KEYWORDS = frozenset({"target", "main", "reactor"})


@dataclass
class ParseResult:
    model: Model | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens, lex_diags = tokenize(text)
        self.diagnostics: list[Diagnostic] = list(lex_diags)
        self.pos = 0

    # -- token helpers -------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def at(self, type_: str, value: str | None = None) -> bool:
        tok = self.cur
        return tok.type == type_ and (value is None or tok.value == value)

    def at_keyword(self, word: str) -> bool:
        return self.cur.type == "KEYWORD" and self.cur.value == word

    def advance(self) -> Token:
        tok = self.cur
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def expect(self, type_: str, what: str) -> Token | None:
        if self.at(type_):
            return self.advance()
        self.error(f"expected {what}, found {self._describe(self.cur)}", self.cur)
        return None

    def _describe(self, tok: Token) -> str:
        if tok.type == "EOF":
            return "end of input"
        return repr(tok.value)

    def error(self, message: str, tok: Token) -> None:
        self.diagnostics.append(Diagnostic("error", "LF000", message, self._clamped_span(tok)))

    def _clamped_span(self, tok: Token) -> Span:
        length = max(0, min(tok.length, len(self.text) - tok.offset))
        return Span(tok.line, tok.col, length)

    def span_between(self, start: Token, end: Token) -> Span:
        stop = min(end.offset + end.length, len(self.text))
        return Span(start.line, start.col, max(0, stop - start.offset))

    def skip_semicolons(self) -> None:
        while self.at(";"):
            self.advance()

    # -- model ----------------------------------------------------------

    def parse_model(self) -> ParseResult:
        target: str | None = None
        reactors: list[ReactorDef] = []
        while not self.at("EOF"):
            self.skip_semicolons()
            if self.at("EOF"):
                break
            if self.at_keyword("target"):
                decl = self.parse_target()
                if decl is not None:
                    if target is None:
                        target = decl.name
                    else:
                        self.error("duplicate target declaration", self.tokens[self.pos - 1])
            elif self.at_keyword("main") or self.at_keyword("reactor"):
                reactor = self.parse_reactor()
                if reactor is not None:
                    reactors.append(reactor)
            else:
                self.error(
                    f"expected 'target' or a reactor definition, found {self._describe(self.cur)}",
                    self.cur,
                )
                self._skip_to_top_level()
        errors = [d for d in self.diagnostics if d.severity == "error"]
        if errors:
            return ParseResult(None, self.diagnostics)
        model = Model(target=target, reactors=tuple(reactors), source_text=self.text)
        return ParseResult(model, self.diagnostics)

    def _skip_to_top_level(self) -> None:
        depth = 0
        while not self.at("EOF"):
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                if depth == 0:
                    self.advance()
                    return
                depth -= 1
            elif depth == 0 and self.cur.type == "KEYWORD" and self.cur.value in TOP_KEYWORDS:
                return
            self.advance()

    def parse_target(self) -> TargetDecl | None:
        start = self.advance()  # 'target'
        name = self.expect("ID", "target name")
        if name is None:
            self._skip_to_top_level()
            return None
        end = name
        if self.at(";"):
            end = self.advance()
        return TargetDecl(name.value, self.span_between(start, end))

    # -- reactors ---------------------------------------------------------

    def parse_reactor(self) -> ReactorDef | None:
        start = self.cur
        is_main = False
        if self.at_keyword("main"):
            is_main = True
            self.advance()
        if not self.at_keyword("reactor"):
            self.error("expected 'reactor'", self.cur)
            self._skip_to_top_level()
            return None
        self.advance()
        name = ""
        if self.at("ID"):
            name = self.advance().value
        elif not is_main:
            # only the main reactor may stay anonymous
            self.error("expected reactor name", self.cur)
        params = self.parse_params() if self.at("(") else ()
        if self.expect("{", "'{'") is None:
            self._skip_to_top_level()
            return None
        elements: list[Element] = []
        while not self.at("}") and not self.at("EOF"):
            self.skip_semicolons()
            if self.at("}") or self.at("EOF"):
                break
            element = self.parse_element()
            if element is not None:
                elements.append(element)
        end = self.cur
        if self.expect("}", "'}'") is None:
            end = self.tokens[max(0, self.pos - 1)]
        if self.at(";"):
            end = self.advance()
        return ReactorDef(
            name=name,
            is_main=is_main,
            params=tuple(params),
            elements=tuple(elements),
            span=self.span_between(start, end),
        )

    def parse_params(self) -> list[Param]:
        self.advance()  # '('
        params: list[Param] = []
        while not self.at(")") and not self.at("EOF"):
            name = self.expect("ID", "parameter name")
            if name is None:
                break
            ptype = None
            default = None
            if self.at(":"):
                self.advance()
                type_tok = self.expect("ID", "parameter type")
                ptype = type_tok.value if type_tok else None
            if self.at("="):
                self.advance()
                default = self._raw_value()
            params.append(Param(name.value, ptype, default))
            if self.at(","):
                self.advance()
            else:
                break
        self.expect(")", "')'")
        return params

    def _raw_value(self) -> str:
        """Consume literal tokens up to ',' or ')' and join them canonically."""
        parts: list[str] = []
        while not self.at(",") and not self.at(")") and not self.at("EOF") and not self.at(";"):
            tok = self.advance()
            parts.append(f'"{tok.value}"' if tok.type == "STRING" else tok.value)
        return " ".join(parts)

    # -- elements --------------------------------------------------------

    def parse_element(self) -> Element | None:
        tok = self.cur
        if tok.type == "@":
            return self.parse_timer()
        if tok.type == "KEYWORD":
            if tok.value == "input":
                return self.parse_port(Input)
            if tok.value == "output":
                return self.parse_port(Output)
            if tok.value == "timer":
                return self.parse_timer()
            if tok.value == "state":
                return self.parse_state()
            if tok.value == "reaction":
                return self.parse_reaction()
        if tok.type == "ID":
            if self.peek().type == "=" and self.peek(2).type == "KEYWORD" and self.peek(2).value == "new":
                return self.parse_instantiation()
            return self.parse_connection()
        self.error(f"expected an element, found {self._describe(tok)}", tok)
        self._skip_to_element_boundary()
        return None

    def _skip_to_element_boundary(self) -> None:
        while not self.at("EOF"):
            if self.at(";"):
                self.advance()
                return
            if self.at("}"):
                return
            tok = self.cur
            if tok.type == "@" or (tok.type == "KEYWORD" and tok.value in ELEMENT_KEYWORDS):
                return
            self.advance()

    def parse_port(self, cls: type) -> Element | None:
        start = self.advance()
        name = self.expect("ID", "port name")
        if name is None:
            self._skip_to_element_boundary()
            return None
        ptype = None
        if self.at(":"):
            self.advance()
            type_tok = self.expect("ID", "port type")
            if type_tok is None:
                self._skip_to_element_boundary()
                return None
            ptype = type_tok.value
        end = self.tokens[self.pos - 1]
        if self.at(";"):
            end = self.advance()
        return cls(name.value, ptype, span=self.span_between(start, end))

    def parse_timer(self) -> Timer | None:
        start = self.cur
        label: str | None = None
        while self.at("@"):
            self.advance()
            attr = self.expect("ID", "attribute name")
            if attr is None:
                self._skip_to_element_boundary()
                return None
            value: str | None = None
            if self.at("("):
                self.advance()
                if self.at("STRING"):
                    value = self.advance().value
                if self.expect(")", "')'") is None:
                    self._skip_to_element_boundary()
                    return None
            if attr.value == "label" and value is not None:
                label = value
        if not self.at_keyword("timer"):
            self.error("expected 'timer' after attributes", self.cur)
            self._skip_to_element_boundary()
            return None
        self.advance()
        name = self.expect("ID", "timer name")
        if name is None:
            self._skip_to_element_boundary()
            return None
        offset = period = None
        if self.at("("):
            self.advance()
            if not self.at(")"):
                offset = self.parse_expr()
                if offset is None:
                    self._skip_to_element_boundary()
                    return None
                if self.at(","):
                    self.advance()
                    period = self.parse_expr()
                    if period is None:
                        self._skip_to_element_boundary()
                        return None
            if self.expect(")", "')' after timer arguments") is None:
                self._skip_to_element_boundary()
                return None
        end = self.tokens[self.pos - 1]
        if self.at(";"):
            end = self.advance()
        return Timer(name.value, offset, period, label, span=self.span_between(start, end))

    def parse_expr(self) -> TimeExpr | None:
        """INT with optional unit word, or a bare identifier (validated later)."""
        tok = self.cur
        if tok.type == "INT":
            self.advance()
            value = int(tok.value)
            if self.at("ID"):
                unit = self.advance()
                return TimeExpr(
                    f"{value} {unit.value}", value, unit.value, self.span_between(tok, unit)
                )
            return TimeExpr(str(value), value, None, self._clamped_span(tok))
        if tok.type == "ID":
            self.advance()
            return TimeExpr(tok.value, None, None, self._clamped_span(tok))
        self.error(f"expected an expression, found {self._describe(tok)}", tok)
        return None

    def parse_state(self) -> State | None:
        start = self.advance()
        name = self.expect("ID", "state variable name")
        if name is None:
            self._skip_to_element_boundary()
            return None
        stype = None
        init = None
        if self.at(":"):
            self.advance()
            type_tok = self.expect("ID", "state type")
            if type_tok is None:
                self._skip_to_element_boundary()
                return None
            stype = type_tok.value
        if self.at("="):
            self.advance()
            init = self.parse_expr()
            if init is None:
                self._skip_to_element_boundary()
                return None
        end = self.tokens[self.pos - 1]
        if self.at(";"):
            end = self.advance()
        return State(name.value, stype, init, span=self.span_between(start, end))

    def parse_reaction(self) -> Reaction | None:
        start = self.advance()
        if self.expect("(", "'(' after 'reaction'") is None:
            self._skip_to_element_boundary()
            return None
        triggers: list[Ref] = []
        if not self.at(")"):
            triggers = self.parse_ref_list()
            if triggers is None:
                self._skip_to_element_boundary()
                return None
        if self.expect(")", "')' after triggers") is None:
            self._skip_to_element_boundary()
            return None
        effects: list[Ref] = []
        if self.at("->"):
            self.advance()
            effects = self.parse_ref_list()
            if effects is None:
                self._skip_to_element_boundary()
                return None
        body_tok = self.cur
        if body_tok.type != "HOSTCODE":
            self.error("expected a host-code block '{= ... =}'", body_tok)
            self._skip_to_element_boundary()
            return None
        self.advance()
        end = body_tok
        if self.at(";"):
            end = self.advance()
        return Reaction(
            triggers=tuple(triggers),
            effects=tuple(effects),
            body=HostCode(body_tok.value),
            span=self.span_between(start, end),
        )

    def parse_ref_list(self) -> list[Ref] | None:
        refs: list[Ref] = []
        while True:
            ref = self.parse_ref()
            if ref is None:
                return None
            refs.append(ref)
            if self.at(","):
                self.advance()
            else:
                return refs

    def parse_ref(self) -> Ref | None:
        first = self.expect("ID", "a name")
        if first is None:
            return None
        if self.at("."):
            self.advance()
            second = self.expect("ID", "a port name")
            if second is None:
                return None
            return Ref(first.value, second.value, self.span_between(first, second))
        return Ref(None, first.value, self._clamped_span(first))

    def parse_instantiation(self) -> Instantiation | None:
        start = self.advance()  # instance name
        self.advance()  # '='
        self.advance()  # 'new'
        reactor = self.expect("ID", "reactor name")
        if reactor is None:
            self._skip_to_element_boundary()
            return None
        if self.expect("(", "'('") is None:
            self._skip_to_element_boundary()
            return None
        args: list[tuple[str, str]] = []
        while not self.at(")") and not self.at("EOF"):
            arg_name = self.expect("ID", "argument name")
            if arg_name is None:
                self._skip_to_element_boundary()
                return None
            if self.expect("=", "'='") is None:
                self._skip_to_element_boundary()
                return None
            args.append((arg_name.value, self._raw_value()))
            if self.at(","):
                self.advance()
            else:
                break
        if self.expect(")", "')'") is None:
            self._skip_to_element_boundary()
            return None
        end = self.tokens[self.pos - 1]
        if self.at(";"):
            end = self.advance()
        return Instantiation(
            start.value, reactor.value, tuple(args), span=self.span_between(start, end)
        )

    def parse_connection(self) -> Connection | None:
        start = self.cur
        source = self.parse_ref()
        if source is None:
            self._skip_to_element_boundary()
            return None
        if self.expect("->", "'->'") is None:
            self._skip_to_element_boundary()
            return None
        target = self.parse_ref()
        if target is None:
            self._skip_to_element_boundary()
            return None
        end = self.tokens[self.pos - 1]
        if self.at(";"):
            end = self.advance()
        return Connection(source, target, span=self.span_between(start, end))


def parse_model(text: str) -> ParseResult:
    """Parse a full program. `result.model` is set iff there were no errors."""
    return _Parser(text).parse_model()


@dataclass
class SnippetResult:
    node: object | None
    kind: str | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.node is not None


def parse_snippet(text: str) -> SnippetResult:
    """Parse exactly one fragment: an element, a reactor definition, or a
    target declaration. Used to check tool outputs and insertions."""
    parser = _Parser(text)
    parser.skip_semicolons()
    node: object | None
    if parser.at_keyword("target"):
        node = parser.parse_target()
    elif parser.at_keyword("main") or parser.at_keyword("reactor"):
        node = parser.parse_reactor()
    else:
        node = parser.parse_element()
    parser.skip_semicolons()
    if not parser.at("EOF"):
        parser.error("expected exactly one element", parser.cur)
    errors = [d for d in parser.diagnostics if d.severity == "error"]
    if errors or node is None:
        return SnippetResult(None, None, parser.diagnostics)
    return SnippetResult(node, element_kind(node), parser.diagnostics)
