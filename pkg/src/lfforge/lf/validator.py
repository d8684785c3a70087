"""Static checks over a parsed Model.

Diagnostic codes are a stable contract:

  LF001  missing mandatory target declaration
  LF002  not exactly one main reactor
  LF003  instantiated reactor does not resolve
  LF004  connection endpoint unresolved or direction illegal
  LF005  reaction trigger/effect does not resolve
  LF006  duplicate name (reactor or element)
  LF007  timer offset/period must be 0 or carry a time unit

The result is deterministic: same Model, same list, same order.
"""

from __future__ import annotations

from .ast import (
    Connection,
    Diagnostic,
    Input,
    Instantiation,
    Model,
    Output,
    Reaction,
    ReactorDef,
    Ref,
    Span,
    TimeExpr,
    Timer,
)
from .lexer import TIME_UNITS


def validate(model: Model) -> list[Diagnostic]:
    checker = _Checker(model)
    checker.run()
    return checker.diagnostics


class _Checker:
    def __init__(self, model: Model):
        self.model = model
        self.diagnostics: list[Diagnostic] = []
        self.defs = {r.name: r for r in model.reactors if r.name}

    def error(self, code: str, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic("error", code, message, span))

    def run(self) -> None:
        if self.model.target is None:
            self.error("LF001", "missing mandatory target declaration", Span(0, 0, 0))
        mains = [r for r in self.model.reactors if r.is_main]
        if not mains:
            span = self.model.reactors[0].span if self.model.reactors else Span(0, 0, 0)
            self.error("LF002", "no main reactor defined", span)
        else:
            for extra in mains[1:]:
                self.error("LF002", "more than one main reactor", extra.span)
        seen: dict[str, ReactorDef] = {}
        for reactor in self.model.reactors:
            if reactor.name:
                if reactor.name in seen:
                    self.error("LF006", f"duplicate reactor name '{reactor.name}'", reactor.span)
                else:
                    seen[reactor.name] = reactor
        for reactor in self.model.reactors:
            self.check_reactor(reactor)

    def check_reactor(self, reactor: ReactorDef) -> None:
        names: set[str] = set()
        for element in reactor.elements:
            name = getattr(element, "name", None)
            if name is not None:
                if name in names:
                    self.error(
                        "LF006",
                        f"duplicate name '{name}' in reactor '{reactor.name or 'main'}'",
                        element.span,
                    )
                names.add(name)
        instances = {e.name: e for e in reactor.elements if isinstance(e, Instantiation)}
        for element in reactor.elements:
            if isinstance(element, Instantiation):
                if element.reactor not in self.defs:
                    self.error(
                        "LF003",
                        f"instantiation of unknown reactor '{element.reactor}'",
                        element.span,
                    )
            elif isinstance(element, Connection):
                self.check_connection(reactor, instances, element)
            elif isinstance(element, Reaction):
                self.check_reaction(reactor, instances, element)
            elif isinstance(element, Timer):
                self.check_timer(element)

    # A connection carries data from a source-capable port to a sink-capable
    # port: sources are contained outputs or the parent's own inputs, sinks
    # are contained inputs or the parent's own outputs.
    def check_connection(
        self, reactor: ReactorDef, instances: dict[str, Instantiation], conn: Connection
    ) -> None:
        src = self._resolve_port(reactor, instances, conn.source)
        dst = self._resolve_port(reactor, instances, conn.target)
        if src is None:
            self.error("LF004", f"connection source '{conn.source.text}' does not resolve", conn.span)
        if dst is None:
            self.error("LF004", f"connection target '{conn.target.text}' does not resolve", conn.span)
        if src is None or dst is None:
            return
        src_kind, src_contained = src
        dst_kind, dst_contained = dst
        src_ok = (src_contained and src_kind == "output") or (not src_contained and src_kind == "input")
        dst_ok = (dst_contained and dst_kind == "input") or (not dst_contained and dst_kind == "output")
        if not src_ok or not dst_ok:
            self.error(
                "LF004",
                f"illegal connection direction '{conn.source.text} -> {conn.target.text}'",
                conn.span,
            )

    def _resolve_port(
        self, reactor: ReactorDef, instances: dict[str, Instantiation], ref: Ref
    ) -> tuple[str, bool] | None:
        """Resolve a port ref to (kind, contained?) or None."""
        if ref.container is None:
            for element in reactor.elements:
                if isinstance(element, Input) and element.name == ref.name:
                    return ("input", False)
                if isinstance(element, Output) and element.name == ref.name:
                    return ("output", False)
            return None
        inst = instances.get(ref.container)
        if inst is None:
            return None
        child = self.defs.get(inst.reactor)
        if child is None:
            return None
        for element in child.elements:
            if isinstance(element, Input) and element.name == ref.name:
                return ("input", True)
            if isinstance(element, Output) and element.name == ref.name:
                return ("output", True)
        return None

    def check_reaction(
        self, reactor: ReactorDef, instances: dict[str, Instantiation], reaction: Reaction
    ) -> None:
        for ref in reaction.triggers:
            if not self._trigger_resolves(reactor, instances, ref):
                self.error("LF005", f"trigger '{ref.text}' does not resolve", ref.span)
        for ref in reaction.effects:
            if not self._effect_resolves(reactor, instances, ref):
                self.error("LF005", f"effect '{ref.text}' does not resolve", ref.span)

    def _trigger_resolves(
        self, reactor: ReactorDef, instances: dict[str, Instantiation], ref: Ref
    ) -> bool:
        if ref.container is None:
            for element in reactor.elements:
                if isinstance(element, (Input, Timer)) and element.name == ref.name:
                    return True
            return False
        resolved = self._resolve_port(reactor, instances, ref)
        return resolved == ("output", True)

    def _effect_resolves(
        self, reactor: ReactorDef, instances: dict[str, Instantiation], ref: Ref
    ) -> bool:
        if ref.container is None:
            for element in reactor.elements:
                if isinstance(element, Output) and element.name == ref.name:
                    return True
            return False
        resolved = self._resolve_port(reactor, instances, ref)
        return resolved == ("input", True)

    def check_timer(self, timer: Timer) -> None:
        for which, expr in (("offset", timer.offset), ("period", timer.period)):
            if expr is None:
                continue
            if not _time_expr_ok(expr):
                self.error(
                    "LF007",
                    f"timer {which} '{expr.text}' must be 0 or an integer with a time unit",
                    expr.span,
                )


def _time_expr_ok(expr: TimeExpr) -> bool:
    if expr.value is None:
        return False
    if expr.unit is None:
        return expr.value == 0
    return expr.unit in TIME_UNITS
