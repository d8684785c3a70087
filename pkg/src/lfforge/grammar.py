"""Parser for an Xtext-like grammar notation with attached doc comments.

Supported notation: `Name: body ;` rule definitions, quoted keywords,
`=`/`+=` feature assignments, parenthesized groups, `?`/`*` postfix
multiplicity, `|` alternatives, and `//` comments. The doc block of a rule is
the contiguous run of comment lines immediately above it, with no blank line
in between. Cross-references, actions, hidden terminals, and terminal rules
are out of the supported subset and are rejected with a diagnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .lf.ast import Diagnostic, Span

# Multiplicity is normalized onto groups: `atom?` parses as a one-child
# optional group, so Keyword/Feature never carry their own multiplicity.

ONE = "one"
OPTIONAL = "optional"
STAR = "star"


@dataclass(frozen=True)
class Keyword:
    text: str


@dataclass(frozen=True)
class Feature:
    name: str
    operator: str  # "=" | "+="
    type: str  # referenced type name, or a quoted keyword (presence flag)
    is_keyword_type: bool = False


@dataclass(frozen=True)
class Group:
    children: tuple["BodyNode", ...]
    multiplicity: str = ONE


@dataclass(frozen=True)
class Alternative:
    branches: tuple[tuple["BodyNode", ...], ...]


BodyNode = Keyword | Feature | Group | Alternative


@dataclass(frozen=True)
class Rule:
    name: str
    doc: tuple[str, ...]
    body: tuple[BodyNode, ...]


@dataclass(frozen=True)
class GrammarModel:
    rules: tuple[Rule, ...]

    def rule(self, name: str) -> Rule | None:
        for r in self.rules:
            if r.name == name:
                return r
        return None


@dataclass
class GrammarParseResult:
    grammar: GrammarModel | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.grammar is not None


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>'(?:[^'\\]|\\.)*')
  | (?P<op>\+=|[=:;()?*|])
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)

REJECTED = {
    "[": "cross-references are not supported",
    "{": "actions are not supported",
    "]": "cross-references are not supported",
    "}": "actions are not supported",
    "+": "'+' multiplicity is not supported",
    "&": "unordered groups are not supported",
    "'": "unbalanced quote",
}


@dataclass(frozen=True)
class _Tok:
    kind: str  # "string" | "op" | "name" | "eof"
    value: str
    offset: int
    line: int
    col: int

    def span(self, text_len: int | None = None) -> Span:
        return Span(self.line, self.col, len(self.value))


def _tokenize(text: str) -> tuple[list[_Tok], list[Diagnostic], dict[int, list[tuple[int, str]]]]:
    """Returns (tokens, diagnostics, comments) where comments maps line ->
    list of (line, text-without-prefix) entries for doc attachment."""
    tokens: list[_Tok] = []
    diagnostics: list[Diagnostic] = []
    comments: dict[int, list[tuple[int, str]]] = {}
    line = 0
    line_start = 0
    for m in _TOKEN_RE.finditer(text):
        start = m.start()
        while True:
            nl = text.find("\n", line_start, start)
            if nl == -1:
                break
            line += 1
            line_start = nl + 1
        col = start - line_start
        if m.lastgroup == "ws":
            continue
        if m.lastgroup == "comment":
            # only whole-line comments can form a doc block
            if not text[line_start:start].strip():
                comments.setdefault(line, []).append((line, m.group().removeprefix("//").strip()))
            continue
        if m.lastgroup == "bad":
            ch = m.group()
            reason = REJECTED.get(ch, f"unexpected character {ch!r}")
            diagnostics.append(Diagnostic("error", "GM001", reason, Span(line, col, 1)))
            continue
        tokens.append(_Tok(m.lastgroup, m.group(), start, line, col))
    tokens.append(_Tok("eof", "", len(text), line, len(text) - line_start))
    return tokens, diagnostics, comments


class _GrammarParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens, self.diagnostics, self.comments = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Tok:
        return self.tokens[self.pos]

    def advance(self) -> _Tok:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_op(self, op: str) -> bool:
        return self.cur.kind == "op" and self.cur.value == op

    def error(self, message: str, tok: _Tok) -> None:
        self.diagnostics.append(Diagnostic("error", "GM002", message, tok.span()))

    def parse(self) -> GrammarParseResult:
        rules: list[Rule] = []
        names: set[str] = set()
        while self.cur.kind != "eof":
            name_tok = self.cur
            rule = self.parse_rule()
            if rule is None:
                self._skip_past_semicolon()
                continue
            if rule.name in names:
                self.error(f"duplicate rule name '{rule.name}'", name_tok)
            else:
                names.add(rule.name)
                rules.append(rule)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        if errors:
            return GrammarParseResult(None, self.diagnostics)
        return GrammarParseResult(GrammarModel(tuple(rules)), self.diagnostics)

    def _skip_past_semicolon(self) -> None:
        while self.cur.kind != "eof":
            if self.at_op(";"):
                self.advance()
                return
            self.advance()

    def parse_rule(self) -> Rule | None:
        name_tok = self.cur
        if name_tok.kind != "name":
            self.error(f"expected a rule name, found {name_tok.value!r}", name_tok)
            return None
        if name_tok.value in ("terminal", "hidden"):
            self.error(f"{name_tok.value} rules are not supported", name_tok)
            return None
        self.advance()
        if not self.at_op(":"):
            self.error(f"expected ':' after rule name '{name_tok.value}'", self.cur)
            return None
        self.advance()
        body = self.parse_alternative(stop={";"})
        if body is None:
            return None
        if not self.at_op(";"):
            self.error(f"rule '{name_tok.value}' is missing its terminating ';'", self.cur)
            return None
        self.advance()
        doc = self._doc_for_line(name_tok.line)
        nodes = body.branches[0] if isinstance(body, Alternative) and len(body.branches) == 1 else None
        return Rule(
            name=name_tok.value,
            doc=doc,
            body=nodes if nodes is not None else (body,),
        )

    def _doc_for_line(self, rule_line: int) -> tuple[str, ...]:
        """Contiguous comment block ending on the line directly above the rule."""
        lines: list[str] = []
        line = rule_line - 1
        while line in self.comments:
            for _, text in reversed(self.comments[line]):
                lines.append(text)
            line -= 1
        lines.reverse()
        return tuple(lines)

    def parse_alternative(self, stop: set[str]) -> Alternative | None:
        branches: list[tuple[BodyNode, ...]] = []
        seq = self.parse_sequence(stop | {"|"})
        if seq is None:
            return None
        branches.append(seq)
        while self.at_op("|"):
            self.advance()
            seq = self.parse_sequence(stop | {"|"})
            if seq is None:
                return None
            branches.append(seq)
        return Alternative(tuple(branches))

    def parse_sequence(self, stop: set[str]) -> tuple[BodyNode, ...] | None:
        items: list[BodyNode] = []
        while True:
            tok = self.cur
            if tok.kind == "eof" or (tok.kind == "op" and tok.value in stop):
                return tuple(items)
            item = self.parse_item()
            if item is None:
                return None
            items.append(item)

    def parse_item(self) -> BodyNode | None:
        atom = self.parse_atom()
        if atom is None:
            return None
        while self.at_op("?") or self.at_op("*"):
            mult = OPTIONAL if self.advance().value == "?" else STAR
            if isinstance(atom, Group) and atom.multiplicity == ONE:
                atom = Group(atom.children, mult)
            else:
                atom = Group((atom,), mult)
        return atom

    def parse_atom(self) -> BodyNode | None:
        tok = self.cur
        if tok.kind == "string":
            self.advance()
            return Keyword(_unquote(tok.value))
        if tok.kind == "name":
            self.advance()
            if self.at_op("=") or self.at_op("+="):
                op = self.advance().value
                rhs = self.cur
                if rhs.kind == "name":
                    self.advance()
                    return Feature(tok.value, op, rhs.value)
                if rhs.kind == "string":
                    self.advance()
                    return Feature(tok.value, op, _unquote(rhs.value), is_keyword_type=True)
                self.error(f"expected a type or keyword after '{tok.value}{op}'", rhs)
                return None
            self.error(
                f"unassigned rule call '{tok.value}' is not supported (use name={tok.value})", tok
            )
            return None
        if self.at_op("("):
            open_tok = self.advance()
            inner = self.parse_alternative(stop={")", ";"})
            if inner is None:
                return None
            if not self.at_op(")"):
                self.error("unbalanced '(': missing ')'", open_tok)
                return None
            self.advance()
            if len(inner.branches) == 1:
                return Group(inner.branches[0], ONE)
            return Group((inner,), ONE)
        self.error(f"unexpected {tok.value!r} in rule body", tok)
        return None


def _unquote(raw: str) -> str:
    return raw[1:-1].replace("\\'", "'").replace("\\\\", "\\")


def parse_grammar(text: str) -> GrammarParseResult:
    return _GrammarParser(text).parse()


@dataclass(frozen=True)
class FeatureInfo:
    name: str
    operator: str
    type: str
    required: bool
    is_keyword_type: bool = False


def features_in_order(rule: Rule) -> list[FeatureInfo]:
    """Features in source order. A feature is required iff none of its
    ancestors is optional, starred, or an alternative branch. Duplicates
    merge: first occurrence fixes operator/type, any optional occurrence
    makes the merged feature optional."""
    found: dict[str, FeatureInfo] = {}
    order: list[str] = []

    def walk(nodes: tuple[BodyNode, ...], required: bool) -> None:
        for node in nodes:
            if isinstance(node, Feature):
                info = found.get(node.name)
                if info is None:
                    found[node.name] = FeatureInfo(
                        node.name, node.operator, node.type, required, node.is_keyword_type
                    )
                    order.append(node.name)
                elif info.required and not required:
                    found[node.name] = FeatureInfo(
                        info.name, info.operator, info.type, False, info.is_keyword_type
                    )
            elif isinstance(node, Group):
                walk(node.children, required and node.multiplicity == ONE)
            elif isinstance(node, Alternative):
                for branch in node.branches:
                    walk(branch, False)

    walk(rule.body, True)
    return [found[name] for name in order]
