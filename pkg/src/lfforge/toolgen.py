"""Compiles grammar rules into callable tool descriptions.

Each rule with at least one feature yields a pair:

  * a ToolSchema named `create<RuleName>` whose parameters mirror the rule's
    features (order, types, optionality), and
  * a SyntaxTemplate that renders schema-valid arguments back into the
    rule's concrete syntax.

Parameter descriptions come from the rule's doc block: the first doc line
mentioning the parameter name wins, with a generic fallback. Type mapping is
ID/Expression and other references -> string, INT -> integer, `+=` features
-> array of string, keyword-typed features (presence flags) -> boolean.
Offset/period style expression parameters stay strings on purpose: rendered
syntax has to carry time units.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .grammar import (
    ONE,
    Alternative,
    BodyNode,
    Feature,
    FeatureInfo,
    GrammarModel,
    Group,
    Keyword,
    Rule,
    features_in_order,
)


class ToolgenError(Exception):
    pass


@dataclass(frozen=True)
class ParamSpec:
    name: str
    json_type: str  # "string" | "integer" | "boolean" | "array-of-string"
    description: str
    optional: bool
    source_type: str = "ID"  # grammar type the parameter came from


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    parameters: tuple[ParamSpec, ...]
    returns: tuple[str, str]  # (json type, description)

    def param(self, name: str) -> ParamSpec | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    @property
    def required(self) -> list[str]:
        return [p.name for p in self.parameters if not p.optional]

    def to_wire(self) -> dict:
        """The `{type: function, function: {...}}` shape chat endpoints expect."""
        properties = {}
        for p in self.parameters:
            if p.json_type == "array-of-string":
                prop: dict = {"type": "array", "items": {"type": "string"}}
            else:
                prop = {"type": p.json_type}
            prop["description"] = p.description
            properties[p.name] = prop
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": self.required,
                },
            },
        }


# -- templates ---------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Slot:
    param: str


@dataclass(frozen=True)
class OptionalGroup:
    parts: tuple["TemplatePart", ...]
    guard: tuple[str, ...]  # params that must be present for the group to render
    repeat_for: str | None = None  # array param driving per-item repetition


TemplatePart = Literal | Slot | OptionalGroup


@dataclass(frozen=True)
class SyntaxTemplate:
    rule_name: str
    parts: tuple[TemplatePart, ...]
    booleans: tuple[tuple[str, str], ...] = ()  # (param, keyword it renders as)

    def render(self, args: dict) -> str:
        tokens: list[str] = []
        cursors: dict[str, int] = {}
        self._render_parts(self.parts, args, tokens, cursors)
        return _join_tokens(tokens)

    def _render_parts(
        self, parts: tuple[TemplatePart, ...], args: dict, out: list[str], cursors: dict[str, int]
    ) -> None:
        keywords = dict(self.booleans)
        for part in parts:
            if isinstance(part, Literal):
                out.append(part.text)
            elif isinstance(part, Slot):
                value = args.get(part.param)
                if part.param in keywords:
                    if value:
                        out.append(keywords[part.param])
                elif isinstance(value, list):
                    i = cursors.get(part.param, 0)
                    if i < len(value):
                        out.append(str(value[i]))
                        cursors[part.param] = i + 1
                elif value is not None:
                    out.append(str(value))
            elif isinstance(part, OptionalGroup):
                if part.repeat_for is not None:
                    items = args.get(part.repeat_for)
                    if not isinstance(items, list):
                        continue
                    while cursors.get(part.repeat_for, 0) < len(items):
                        before = cursors.get(part.repeat_for, 0)
                        self._render_parts(part.parts, args, out, cursors)
                        if cursors.get(part.repeat_for, 0) == before:
                            break  # group consumed nothing; avoid spinning
                    continue
                if self._guard_satisfied(part, args):
                    self._render_parts(part.parts, args, out, cursors)

    def _guard_satisfied(self, group: OptionalGroup, args: dict) -> bool:
        if group.guard:
            return all(_present(args.get(name)) for name in group.guard)
        # keyword-only groups always render (canonical terminators);
        # slot-bearing groups without required slots render if anything is present
        slots = _slot_params(group.parts)
        if not slots:
            return True
        return any(_present(args.get(name)) for name in slots)


def _present(value: object) -> bool:
    if value is None:
        return False
    if isinstance(value, list):
        return len(value) > 0
    if isinstance(value, bool):
        return value
    return True


def _slot_params(parts: tuple[TemplatePart, ...]) -> list[str]:
    names: list[str] = []
    for part in parts:
        if isinstance(part, Slot):
            names.append(part.param)
        elif isinstance(part, OptionalGroup):
            names.extend(_slot_params(part.parts))
    return names


# Concrete-syntax token joining: single spaces except around punctuation
# that hugs its neighbour.
_NO_SPACE_BEFORE = {",", ";", ")", "(", ":", "."}
_NO_SPACE_AFTER = {"(", "."}


def _join_tokens(tokens: list[str]) -> str:
    out = ""
    prev = ""
    for tok in tokens:
        if tok == "":
            continue
        if not out or tok in _NO_SPACE_BEFORE or prev in _NO_SPACE_AFTER:
            out += tok
        else:
            out += " " + tok
        prev = tok
    return out


# -- schema generation --------------------------------------------------------

_TYPE_MAP = {"INT": "integer"}


def _json_type(info: FeatureInfo) -> str:
    if info.operator == "+=":
        return "array-of-string"
    if info.is_keyword_type:
        return "boolean"
    return _TYPE_MAP.get(info.type, "string")


def _param_description(rule: Rule, info: FeatureInfo) -> str:
    pattern = re.compile(rf"\b{re.escape(info.name)}\b", re.IGNORECASE)
    for line in rule.doc:
        if pattern.search(line):
            return line
    return f"The {info.name} of the {rule.name.lower()}."


def generate_tool_schema(rule: Rule, description: str | None = None) -> ToolSchema:
    features = features_in_order(rule)
    if not features:
        raise ToolgenError(f"rule '{rule.name}' has no features, nothing to parameterize")
    params = tuple(
        ParamSpec(
            name=f.name,
            json_type=_json_type(f),
            description=_param_description(rule, f),
            optional=not f.required,
            source_type=f.type,
        )
        for f in features
    )
    low = rule.name.lower()
    return ToolSchema(
        name=f"create{rule.name}",
        description=description
        or f"Creates a {low} definition in concrete syntax based on the given parameters.",
        parameters=params,
        returns=("string", f"The concrete syntax representation of the {low}."),
    )


def derive_template(rule: Rule) -> SyntaxTemplate:
    booleans: list[tuple[str, str]] = []

    def convert(nodes: tuple[BodyNode, ...]) -> tuple[TemplatePart, ...]:
        parts: list[TemplatePart] = []
        for node in nodes:
            if isinstance(node, Keyword):
                parts.append(Literal(node.text))
            elif isinstance(node, Feature):
                if node.is_keyword_type:
                    booleans.append((node.name, node.type))
                parts.append(Slot(node.name))
            elif isinstance(node, Alternative):
                raise ToolgenError(
                    f"rule '{rule.name}' uses alternatives; write its template by hand "
                    "and register it directly"
                )
            elif isinstance(node, Group):
                inner = convert(node.children)
                if node.multiplicity == ONE:
                    parts.extend(inner)
                    continue
                repeat = _repeat_param(node) if node.multiplicity == "star" else None
                guard = tuple(_required_slots(node.children))
                parts.append(OptionalGroup(inner, guard, repeat))
        return tuple(parts)

    def _required_slots(nodes: tuple[BodyNode, ...]) -> list[str]:
        names: list[str] = []
        for node in nodes:
            if isinstance(node, Feature) and node.operator == "=" and not node.is_keyword_type:
                names.append(node.name)
            elif isinstance(node, Group) and node.multiplicity == ONE:
                names.extend(_required_slots(node.children))
        return names

    def _repeat_param(group: Group) -> str | None:
        for node in group.children:
            if isinstance(node, Feature) and node.operator == "+=":
                return node.name
        return None

    parts = convert(rule.body)
    return SyntaxTemplate(rule.name, parts, tuple(booleans))


@dataclass
class GenerationReport:
    pairs: list[tuple[ToolSchema, SyntaxTemplate]] = field(default_factory=list)
    errors: list[tuple[str, str]] = field(default_factory=list)  # (rule name, reason)


def generate_all(grammar: GrammarModel) -> GenerationReport:
    """One (schema, template) pair per generatable rule, in source order.
    Rules that cannot be compiled are reported, never silently dropped."""
    report = GenerationReport()
    for rule in grammar.rules:
        try:
            schema = generate_tool_schema(rule)
            template = derive_template(rule)
        except ToolgenError as exc:
            report.errors.append((rule.name, str(exc)))
            continue
        report.pairs.append((schema, template))
    if not report.pairs:
        raise ToolgenError("no generatable rules in grammar")
    return report


# -- wire files ---------------------------------------------------------------


def tools_to_json(schemas: list[ToolSchema]) -> str:
    return json.dumps([s.to_wire() for s in schemas], indent=2) + "\n"


def _part_to_json(part: TemplatePart) -> dict:
    if isinstance(part, Literal):
        return {"kind": "literal", "text": part.text}
    if isinstance(part, Slot):
        return {"kind": "slot", "param": part.param}
    out: dict = {
        "kind": "group",
        "parts": [_part_to_json(p) for p in part.parts],
        "guard": list(part.guard),
    }
    if part.repeat_for is not None:
        out["repeat_for"] = part.repeat_for
    return out


def _part_from_json(data: dict) -> TemplatePart:
    if data["kind"] == "literal":
        return Literal(data["text"])
    if data["kind"] == "slot":
        return Slot(data["param"])
    return OptionalGroup(
        tuple(_part_from_json(p) for p in data["parts"]),
        tuple(data.get("guard", [])),
        data.get("repeat_for"),
    )


def templates_to_json(pairs: list[tuple[ToolSchema, SyntaxTemplate]]) -> str:
    out = {
        schema.name: {
            "rule": template.rule_name,
            "parts": [_part_to_json(p) for p in template.parts],
            "booleans": [list(b) for b in template.booleans],
        }
        for schema, template in pairs
    }
    return json.dumps(out, indent=2) + "\n"


def write_tool_files(report: GenerationReport, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    tools_path = out_dir / "tools.json"
    templates_path = out_dir / "templates.json"
    tools_path.write_text(tools_to_json([s for s, _ in report.pairs]), encoding="utf-8")
    templates_path.write_text(templates_to_json(report.pairs), encoding="utf-8")
    return tools_path, templates_path


def schema_from_wire(entry: dict) -> ToolSchema:
    fn = entry["function"]
    params = []
    required = set(fn["parameters"].get("required", []))
    for name, prop in fn["parameters"]["properties"].items():
        if prop.get("type") == "array":
            json_type = "array-of-string"
        else:
            json_type = prop.get("type", "string")
        params.append(
            ParamSpec(
                name=name,
                json_type=json_type,
                description=prop.get("description", ""),
                optional=name not in required,
            )
        )
    return ToolSchema(
        name=fn["name"],
        description=fn.get("description", ""),
        parameters=tuple(params),
        returns=("string", ""),
    )


def load_tool_files(tools_path: Path, templates_path: Path) -> list[tuple[ToolSchema, SyntaxTemplate]]:
    tools = json.loads(tools_path.read_text(encoding="utf-8"))
    templates = json.loads(templates_path.read_text(encoding="utf-8"))
    pairs = []
    for entry in tools:
        schema = schema_from_wire(entry)
        tdata = templates.get(schema.name)
        if tdata is None:
            raise ToolgenError(f"templates file is missing an entry for '{schema.name}'")
        template = SyntaxTemplate(
            rule_name=tdata.get("rule", schema.name),
            parts=tuple(_part_from_json(p) for p in tdata["parts"]),
            booleans=tuple((b[0], b[1]) for b in tdata.get("booleans", [])),
        )
        pairs.append((schema, template))
    return pairs
