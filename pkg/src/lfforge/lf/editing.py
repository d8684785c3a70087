"""Mechanical model edits used by the refinement loop."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ast import Diagnostic, Model, Span
from .parser import parse_model, parse_snippet
from .printer import pretty_print
from .validator import validate

ELEMENT_KINDS = frozenset(
    {"input", "output", "timer", "state", "reaction", "instantiation", "connection"}
)


@dataclass
class InsertResult:
    model: Model | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None


def insert_element(model: Model, reactor_name: str, snippet: str) -> InsertResult:
    """Append the single element in `snippet` to the named reactor.

    Pure: returns a fresh Model (reparsed from its canonical text so spans
    and source_text stay coherent); the input model is untouched. Fails on an
    unknown reactor, a snippet that is not exactly one element, or a name
    clash with an existing element.
    """
    target = model.reactor(reactor_name)
    if target is None and not (reactor_name == "" and model.main_reactor is not None):
        return InsertResult(
            None,
            [Diagnostic("error", "LF003", f"unknown reactor '{reactor_name}'", Span(0, 0, 0))],
        )
    if target is None:
        target = model.main_reactor
    assert target is not None
    parsed = parse_snippet(snippet)
    if not parsed.ok:
        return InsertResult(None, parsed.diagnostics)
    if parsed.kind not in ELEMENT_KINDS:
        return InsertResult(
            None,
            [
                Diagnostic(
                    "error",
                    "LF000",
                    f"snippet is a {parsed.kind}, not a reactor element",
                    Span(0, 0, 0),
                )
            ],
        )
    new_name = getattr(parsed.node, "name", None)
    if new_name is not None:
        existing = {getattr(e, "name", None) for e in target.elements}
        if new_name in existing:
            return InsertResult(
                None,
                [
                    Diagnostic(
                        "error",
                        "LF006",
                        f"duplicate name '{new_name}' in reactor '{target.name or 'main'}'",
                        Span(0, 0, 0),
                    )
                ],
            )
    updated = replace(target, elements=target.elements + (parsed.node,))
    reactors = tuple(updated if r is target else r for r in model.reactors)
    text = pretty_print(replace(model, reactors=reactors))
    result = parse_model(text)
    assert result.model is not None, "canonical text must reparse"
    lf006 = [d for d in validate(result.model) if d.code == "LF006"]
    old_lf006 = [d for d in validate(model) if d.code == "LF006"]
    if len(lf006) > len(old_lf006):
        return InsertResult(None, lf006)
    return InsertResult(result.model, [])
