"""Canonical pretty-printer.

One element per line, 4-space indent, semicolons on every statement that can
take one, no blank lines. Printing any parsed model and reparsing yields a
structurally equal model, and printed text is a fixpoint of print itself.
"""

from __future__ import annotations

from .ast import (
    Connection,
    Element,
    Input,
    Instantiation,
    Model,
    Output,
    Param,
    Reaction,
    ReactorDef,
    State,
    Timer,
)

INDENT = "    "


def pretty_print(model: Model) -> str:
    lines: list[str] = []
    if model.target is not None:
        lines.append(f"target {model.target};")
    for reactor in model.reactors:
        lines.extend(_reactor_lines(reactor))
    return "\n".join(lines) + "\n" if lines else ""


def _reactor_lines(reactor: ReactorDef) -> list[str]:
    head = "main reactor" if reactor.is_main else "reactor"
    if reactor.name:
        head += f" {reactor.name}"
    if reactor.params:
        head += "(" + ", ".join(_param_text(p) for p in reactor.params) + ")"
    lines = [head + " {"]
    for element in reactor.elements:
        lines.append(INDENT + element_text(element))
    lines.append("}")
    return lines


def _param_text(param: Param) -> str:
    text = param.name
    if param.type:
        text += f": {param.type}"
    if param.default is not None:
        text += f" = {param.default}"
    return text


def element_text(element: Element) -> str:
    """Canonical single-line rendering of one element, without indent."""
    if isinstance(element, Input):
        return _port_text("input", element.name, element.type)
    if isinstance(element, Output):
        return _port_text("output", element.name, element.type)
    if isinstance(element, Timer):
        return _timer_text(element)
    if isinstance(element, State):
        text = f"state {element.name}"
        if element.type:
            text += f": {element.type}"
        if element.init is not None:
            text += f" = {element.init.text}"
        return text + ";"
    if isinstance(element, Reaction):
        text = "reaction(" + ", ".join(r.text for r in element.triggers) + ")"
        if element.effects:
            text += " -> " + ", ".join(r.text for r in element.effects)
        return text + " {=" + element.body.text + "=}"
    if isinstance(element, Instantiation):
        args = ", ".join(f"{name} = {value}" for name, value in element.args)
        return f"{element.name} = new {element.reactor}({args});"
    if isinstance(element, Connection):
        return f"{element.source.text} -> {element.target.text};"
    raise TypeError(f"not an element: {element!r}")


def _port_text(keyword: str, name: str, type_: str | None) -> str:
    text = f"{keyword} {name}"
    if type_:
        text += f": {type_}"
    return text + ";"


def _timer_text(timer: Timer) -> str:
    text = ""
    if timer.label is not None:
        text += f'@label("{timer.label}") '
    text += f"timer {timer.name}"
    if timer.offset is not None:
        text += f"({timer.offset.text}"
        if timer.period is not None:
            text += f", {timer.period.text}"
        text += ")"
    return text + ";"
