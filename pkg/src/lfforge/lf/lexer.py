"""Tokenizer for the Lingua Franca subset.

Host-code blocks `{= ... =}` are scanned as a single token whose value is the
raw text between the delimiters; nothing inside them is ever tokenized.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Diagnostic, Span

KEYWORDS = frozenset(
    {"target", "main", "reactor", "input", "output", "timer", "state", "reaction", "new"}
)

TIME_UNITS = frozenset(
    {"ns", "us", "ms", "s", "sec", "second", "seconds", "minute", "minutes", "hour", "hours"}
)

# Token types: ID, KEYWORD, INT, STRING, HOSTCODE, punctuation literals, EOF.
PUNCT = {"{", "}", "(", ")", ",", ";", ":", "=", "->", ".", "@"}


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    offset: int
    line: int  # 0-based
    col: int  # 0-based

    @property
    def length(self) -> int:
        if self.type == "HOSTCODE":
            return len(self.value) + 4  # include the {= =} delimiters
        if self.type == "STRING":
            return len(self.value) + 2
        return len(self.value)

    def span(self) -> Span:
        return Span(self.line, self.col, self.length)


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 0
        self.col = 0
        self.diagnostics: list[Diagnostic] = []

    def error(self, message: str, line: int, col: int, length: int) -> None:
        self.diagnostics.append(Diagnostic("error", "LF000", message, Span(line, col, length)))

    def tokenize(self) -> list[Token]:
        tokens: list[Token] = []
        text = self.text
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
                continue
            if text.startswith("//", self.pos):
                end = text.find("\n", self.pos)
                self._advance((end if end != -1 else n) - self.pos)
                continue
            if text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end == -1:
                    self.error("unterminated block comment", self.line, self.col, 2)
                    self._advance(n - self.pos)
                else:
                    self._advance(end + 2 - self.pos)
                continue
            if text.startswith("{=", self.pos):
                tokens.append(self._hostcode())
                continue
            if ch.isalpha() or ch == "_":
                tokens.append(self._word())
                continue
            if ch.isdigit():
                tokens.append(self._number())
                continue
            if ch == '"':
                tokens.append(self._string())
                continue
            if text.startswith("->", self.pos):
                tokens.append(self._punct("->"))
                continue
            if ch in PUNCT:
                tokens.append(self._punct(ch))
                continue
            self.error(f"unexpected character {ch!r}", self.line, self.col, 1)
            self._advance(1)
        tokens.append(Token("EOF", "", self.pos, self.line, self.col))
        return tokens

    def _advance(self, count: int) -> None:
        chunk = self.text[self.pos : self.pos + count]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n") - 1
        else:
            self.col += len(chunk)
        self.pos += len(chunk)

    def _make(self, type_: str, value: str) -> Token:
        return Token(type_, value, self.pos, self.line, self.col)

    def _word(self) -> Token:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        value = text[start : self.pos]
        tok = Token("KEYWORD" if value in KEYWORDS else "ID", value, start, self.line, self.col)
        self.col += self.pos - start
        return tok

    def _number(self) -> Token:
        start = self.pos
        text = self.text
        while self.pos < len(text) and text[self.pos].isdigit():
            self.pos += 1
        tok = Token("INT", text[start : self.pos], start, self.line, self.col)
        self.col += self.pos - start
        return tok

    def _string(self) -> Token:
        start = self.pos
        line, col = self.line, self.col
        end = self.text.find('"', self.pos + 1)
        if end == -1:
            self.error("unterminated string literal", line, col, len(self.text) - start)
            value = self.text[start + 1 :]
            self.pos = len(self.text)
        else:
            value = self.text[start + 1 : end]
            self.pos = end + 1
        tok = Token("STRING", value, start, line, col)
        self._resync(start, line, col)
        return tok

    def _hostcode(self) -> Token:
        start = self.pos
        line, col = self.line, self.col
        end = self.text.find("=}", self.pos + 2)
        if end == -1:
            self.error("unterminated host-code block, expected '=}'", line, col, 2)
            value = self.text[start + 2 :]
            self.pos = len(self.text)
        else:
            value = self.text[start + 2 : end]
            self.pos = end + 2
        tok = Token("HOSTCODE", value, start, line, col)
        self._resync(start, line, col)
        return tok

    def _punct(self, value: str) -> Token:
        tok = Token(value, value, self.pos, self.line, self.col)
        self.pos += len(value)
        self.col += len(value)
        return tok

    def _resync(self, start: int, line: int, col: int) -> None:
        """Recompute line/col after consuming a possibly multi-line token."""
        chunk = self.text[start : self.pos]
        newlines = chunk.count("\n")
        if newlines:
            self.line = line + newlines
            self.col = len(chunk) - chunk.rfind("\n") - 1
        else:
            self.line = line
            self.col = col + len(chunk)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    lexer = Lexer(text)
    return lexer.tokenize(), lexer.diagnostics
