"""Transient-view synthesis: Model -> compound node-port-edge graph,
plus SVG and JSON renderers for the laid-out result.

Synthesis is total over parsed models, even invalid ones: references that do
not resolve become port-proxy stubs so the picture never silently drops an
edge the model text contains. Node ids are derived from element paths and are
therefore stable across re-synthesis of the same model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .lf.ast import (
    Connection,
    Input,
    Instantiation,
    Model,
    Output,
    Reaction,
    ReactorDef,
    Ref,
    State,
    Timer,
)

WEST = "west"
EAST = "east"

# per-kind minimum sizes in abstract pixels
_MIN_SIZE = {
    "reactor": (100.0, 60.0),
    "instance": (90.0, 50.0),
    "timer": (44.0, 34.0),
    "reaction": (38.0, 30.0),
    "port-proxy": (18.0, 18.0),
}
_CHAR_W = 7.5


@dataclass
class DiagPort:
    id: str
    side: str  # WEST | EAST
    label: str


@dataclass
class DiagNode:
    id: str
    kind: str  # reactor | instance | timer | reaction | port-proxy
    label: str
    ports: list[DiagPort] = field(default_factory=list)
    children: list["DiagNode"] = field(default_factory=list)
    min_width: float = 0.0
    min_height: float = 0.0

    def port(self, port_id: str) -> DiagPort | None:
        for p in self.ports:
            if p.id == port_id:
                return p
        return None


@dataclass
class DiagEdge:
    id: str
    source: str  # port id
    target: str  # port id
    kind: str  # connection | trigger | effect


@dataclass
class DiagramGraph:
    roots: list[DiagNode] = field(default_factory=list)
    edges: list[DiagEdge] = field(default_factory=list)

    def iter_nodes(self):
        stack = list(self.roots)
        while stack:
            node = stack.pop(0)
            yield node
            stack = node.children + stack

    def all_ports(self) -> dict[str, tuple[DiagNode, DiagPort]]:
        out: dict[str, tuple[DiagNode, DiagPort]] = {}
        for node in self.iter_nodes():
            for port in node.ports:
                out[port.id] = (node, port)
        return out


def _size_hint(kind: str, label: str) -> tuple[float, float]:
    min_w, min_h = _MIN_SIZE[kind]
    return (max(min_w, _CHAR_W * len(label) + 20.0), min_h)


def _make_node(node_id: str, kind: str, label: str) -> DiagNode:
    w, h = _size_hint(kind, label)
    return DiagNode(node_id, kind, label, min_width=w, min_height=h)


class _Synthesizer:
    def __init__(self, model: Model, expand_depth: int):
        self.model = model
        self.expand_depth = expand_depth
        self.edges: list[DiagEdge] = []
        self._edge_ids: set[str] = set()

    def run(self) -> DiagramGraph:
        main = self.model.main_reactor
        if main is not None:
            roots = [self._reactor_node(main, f"/{main.name or 'main'}", depth=0)]
        else:
            # imperfect model: show every definition so feedback never goes blank
            roots = [
                self._reactor_node(r, f"/{r.name or f'reactor{i}'}", depth=0)
                for i, r in enumerate(self.model.reactors)
            ]
        return DiagramGraph(roots, self.edges)

    def _reactor_node(self, reactor: ReactorDef, path: str, depth: int) -> DiagNode:
        node = _make_node(path, "reactor" if depth == 0 else "instance",
                          reactor.name or "main")
        for element in reactor.elements:
            if isinstance(element, Input):
                node.ports.append(DiagPort(f"{path}:{element.name}", WEST, element.name))
            elif isinstance(element, Output):
                node.ports.append(DiagPort(f"{path}:{element.name}", EAST, element.name))
        if depth >= self.expand_depth:
            return node
        reaction_no = 0
        for element in reactor.elements:
            if isinstance(element, Timer):
                child = _make_node(f"{path}/{element.name}", "timer", element.label or element.name)
                child.ports.append(DiagPort(f"{path}/{element.name}:out", EAST, ""))
                node.children.append(child)
            elif isinstance(element, Reaction):
                reaction_no += 1
                child = _make_node(f"{path}/reaction{reaction_no}", "reaction", str(reaction_no))
                child.ports.append(DiagPort(f"{path}/reaction{reaction_no}:in", WEST, ""))
                child.ports.append(DiagPort(f"{path}/reaction{reaction_no}:out", EAST, ""))
                node.children.append(child)
            elif isinstance(element, Instantiation):
                child_def = self.model.reactor(element.reactor)
                child_path = f"{path}/{element.name}"
                if child_def is None:
                    child = _make_node(child_path, "instance", f"{element.name}: {element.reactor}?")
                else:
                    child = self._reactor_node(child_def, child_path, depth + 1)
                    child.label = f"{element.name}: {element.reactor}"
                node.children.append(child)
        # edges after children so proxy targets can attach to existing nodes
        reaction_no = 0
        for element in reactor.elements:
            if isinstance(element, Reaction):
                reaction_no += 1
                self._reaction_edges(node, path, element, reaction_no)
            elif isinstance(element, Connection):
                src = self._resolve(node, path, element.source, want_source=True)
                dst = self._resolve(node, path, element.target, want_source=False)
                self._add_edge("connection", src, dst)
        return node

    def _reaction_edges(self, node: DiagNode, path: str, reaction: Reaction, ordinal: int) -> None:
        rnode_in = f"{path}/reaction{ordinal}:in"
        rnode_out = f"{path}/reaction{ordinal}:out"
        for ref in reaction.triggers:
            src = self._resolve_trigger(node, path, ref)
            self._add_edge("trigger", src, rnode_in)
        for ref in reaction.effects:
            dst = self._resolve(node, path, ref, want_source=False)
            self._add_edge("effect", rnode_out, dst)

    def _resolve_trigger(self, node: DiagNode, path: str, ref: Ref) -> str:
        if ref.container is None:
            for child in node.children:
                if child.kind == "timer" and child.id == f"{path}/{ref.name}":
                    return f"{child.id}:out"
            own = node.port(f"{path}:{ref.name}")
            if own is not None and own.side == WEST:
                return own.id
            return self._proxy(node, path, ref.text)
        return self._resolve(node, path, ref, want_source=True)

    def _resolve(self, node: DiagNode, path: str, ref: Ref, want_source: bool) -> str:
        if ref.container is None:
            own = node.port(f"{path}:{ref.name}")
            if own is not None:
                return own.id
            return self._proxy(node, path, ref.text)
        for child in node.children:
            if child.id == f"{path}/{ref.container}":
                port = child.port(f"{child.id}:{ref.name}")
                if port is not None:
                    return port.id
                break
        return self._proxy(node, path, ref.text)

    def _proxy(self, node: DiagNode, path: str, label: str) -> str:
        proxy_id = f"{path}/?{label}"
        for child in node.children:
            if child.id == proxy_id:
                return f"{proxy_id}:ref"
        proxy = _make_node(proxy_id, "port-proxy", label)
        proxy.ports.append(DiagPort(f"{proxy_id}:ref", WEST, ""))
        proxy.ports.append(DiagPort(f"{proxy_id}:ref-out", EAST, ""))
        node.children.append(proxy)
        return f"{proxy_id}:ref"

    def _add_edge(self, kind: str, source: str, target: str) -> None:
        base = f"{kind}:{source}->{target}"
        edge_id = base
        n = 2
        while edge_id in self._edge_ids:
            edge_id = f"{base}#{n}"
            n += 1
        self._edge_ids.add(edge_id)
        self.edges.append(DiagEdge(edge_id, source, target, kind))


def synthesize(model: Model, expand_depth: int = 2) -> DiagramGraph:
    """Build the transient view: the main reactor's contents plus one expanded
    definition level per instantiation; anything deeper collapses to a box."""
    return _Synthesizer(model, expand_depth).run()


# -- laid-out shapes --------------------------------------------------------------


@dataclass
class PlacedPort:
    id: str
    side: str
    label: str
    x: float
    y: float


@dataclass
class PlacedNode:
    id: str
    kind: str
    label: str
    x: float
    y: float
    w: float
    h: float
    ports: list[PlacedPort] = field(default_factory=list)
    children_ids: list[str] = field(default_factory=list)


@dataclass
class PlacedEdge:
    id: str
    kind: str
    points: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class LaidOutDiagram:
    """Absolute-coordinate version of a DiagramGraph; nodes are stored in
    pre-order (parents before children) so painting order is containment
    order."""

    nodes: list[PlacedNode] = field(default_factory=list)
    edges: list[PlacedEdge] = field(default_factory=list)
    root_ids: list[str] = field(default_factory=list)

    def placed_nodes(self) -> list[PlacedNode]:
        return self.nodes

    def placed_edges(self) -> list[PlacedEdge]:
        return self.edges

    def node(self, node_id: str) -> PlacedNode | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def extent(self) -> tuple[float, float]:
        if not self.nodes:
            return (40.0, 40.0)
        return (
            max(n.x + n.w for n in self.nodes),
            max(n.y + n.h for n in self.nodes),
        )


# -- rendering ------------------------------------------------------------------

_NODE_FILL = {
    "reactor": "#eef3f9",
    "instance": "#f7f3ea",
    "timer": "#ffffff",
    "reaction": "#e8e8ef",
    "port-proxy": "#fbe9e9",
}
_EDGE_STROKE = {"connection": "#1f3a5f", "trigger": "#5f7f1f", "effect": "#7a1f5f"}


def _fmt(x: float) -> str:
    return f"{x:.1f}".rstrip("0").rstrip(".")


def render_svg(diagram: "LaidOutDiagram") -> str:
    """Standalone, byte-stable SVG 1.1 document."""
    width, height = diagram.extent()
    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width + 20)}" height="{_fmt(height + 20)}" '
        f'viewBox="-10 -10 {_fmt(width + 20)} {_fmt(height + 20)}">'
    )
    out.append(
        "<defs>"
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z"/>'
        "</marker>"
        "</defs>"
    )
    for node in diagram.placed_nodes():
        out.extend(_svg_node(node))
    for edge in diagram.placed_edges():
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in edge.points)
        stroke = _EDGE_STROKE.get(edge.kind, "#333333")
        out.append(
            f'<polyline data-id="{escape(edge.id, _ATTR)}" data-kind="{edge.kind}" '
            f'points="{points}" fill="none" stroke="{stroke}" stroke-width="1.5" '
            'marker-end="url(#arrow)"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


_ATTR = {'"': "&quot;"}


def _svg_node(node: "PlacedNode") -> list[str]:
    x, y, w, h = node.x, node.y, node.w, node.h
    fill = _NODE_FILL.get(node.kind, "#ffffff")
    title = f"<title>{escape(node.id)}</title>"
    out: list[str] = []
    common = f'data-id="{escape(node.id, _ATTR)}" data-kind="{node.kind}"'
    if node.kind == "reaction":
        c = 7.0
        pts = [
            (x, y), (x + w - c, y), (x + w, y + h / 2), (x + w - c, y + h),
            (x, y + h), (x + c, y + h / 2),
        ]
        path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts)
        out.append(
            f'<polygon {common} points="{path}" fill="{fill}" stroke="#45455a" '
            f'stroke-width="1">{title}</polygon>'
        )
        out.append(_svg_label(node, centered=True))
    elif node.kind == "timer":
        out.append(
            f'<rect {common} x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'rx="{_fmt(h / 2)}" fill="{fill}" stroke="#45455a" stroke-width="1">{title}</rect>'
        )
        cx, cy, r = x + w / 2, y + h / 2, min(w, h) / 2 - 5
        out.append(
            f'<g data-glyph="clock" stroke="#45455a" stroke-width="1" fill="none">'
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}"/>'
            f'<path d="M {_fmt(cx)} {_fmt(cy - r + 2)} L {_fmt(cx)} {_fmt(cy)} '
            f'L {_fmt(cx + r - 3)} {_fmt(cy)}"/>'
            "</g>"
        )
    else:
        stroke = "#b04a4a" if node.kind == "port-proxy" else "#3b5b7a"
        out.append(
            f'<rect {common} x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'rx="6" fill="{fill}" stroke="{stroke}" stroke-width="1.2">{title}</rect>'
        )
        out.append(_svg_label(node, centered=not node.children_ids))
    for port in node.ports:
        out.append(_svg_port(port))
    return out


def _svg_label(node: "PlacedNode", centered: bool) -> str:
    if centered:
        x, y, anchor = node.x + node.w / 2, node.y + node.h / 2 + 4, "middle"
    else:
        x, y, anchor = node.x + node.w / 2, node.y + 14, "middle"
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
        f'font-family="sans-serif" font-size="11" fill="#1c2733">{escape(node.label)}</text>'
    )


def _svg_port(port: "PlacedPort") -> str:
    # small triangle pointing east (the flow direction), centered on the border
    x, y = port.x, port.y
    pts = f"{_fmt(x - 4)},{_fmt(y - 4)} {_fmt(x + 4)},{_fmt(y)} {_fmt(x - 4)},{_fmt(y + 4)}"
    label = (
        f'<text x="{_fmt(x + (7 if port.side == WEST else -7))}" y="{_fmt(y - 3)}" '
        f'text-anchor="{"start" if port.side == WEST else "end"}" '
        f'font-family="sans-serif" font-size="9" fill="#3b4a5a">{escape(port.label)}</text>'
        if port.label
        else ""
    )
    return (
        f'<polygon data-port="{escape(port.id, _ATTR)}" points="{pts}" fill="#30404f"/>' + label
    )


def render_json(diagram: "LaidOutDiagram") -> str:
    """Render spec with the same coordinates as the SVG output."""
    nodes = []
    for node in diagram.placed_nodes():
        nodes.append(
            {
                "id": node.id,
                "kind": node.kind,
                "label": node.label,
                "x": node.x,
                "y": node.y,
                "w": node.w,
                "h": node.h,
                "ports": [
                    {"id": p.id, "side": p.side, "label": p.label, "x": p.x, "y": p.y}
                    for p in node.ports
                ],
            }
        )
    edges = [
        {"id": e.id, "kind": e.kind, "points": [[x, y] for x, y in e.points]}
        for e in diagram.placed_edges()
    ]
    return json.dumps({"nodes": nodes, "edges": edges}, indent=2) + "\n"
