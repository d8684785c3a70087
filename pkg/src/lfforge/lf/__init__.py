"""Lingua Franca subset: AST, parser, validator, pretty-printer, edits."""

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
    diagnostics_to_json,
    element_kind,
)
from .editing import InsertResult, insert_element
from .lexer import TIME_UNITS
from .parser import ParseResult, SnippetResult, parse_model, parse_snippet
from .printer import element_text, pretty_print
from .validator import validate

__all__ = [
    "Connection",
    "Diagnostic",
    "Element",
    "HostCode",
    "Input",
    "InsertResult",
    "Instantiation",
    "Model",
    "Output",
    "Param",
    "ParseResult",
    "Reaction",
    "ReactorDef",
    "Ref",
    "SnippetResult",
    "Span",
    "State",
    "TargetDecl",
    "TimeExpr",
    "Timer",
    "TIME_UNITS",
    "diagnostics_to_json",
    "element_kind",
    "element_text",
    "insert_element",
    "parse_model",
    "parse_snippet",
    "pretty_print",
    "validate",
]
