"""Shared random generators and oracles for the test suite.

The generators here are deliberately domain-aware: "schema-valid" arguments
for a tool mean values of the right JSON type whose content fits the grammar
slot they fill (identifiers for ID, time expressions for Expression, ...).
The oracles (crossing counter, overlap checker, toposort) are independent
implementations kept away from the code under test.
"""

from __future__ import annotations

import random

from lfforge.diagram import EAST, WEST, DiagEdge, DiagNode, DiagPort, DiagramGraph
from lfforge.lf.ast import (
    Connection,
    HostCode,
    Input,
    Instantiation,
    Model,
    Output,
    Param,
    Reaction,
    ReactorDef,
    Ref,
    State,
    TimeExpr,
    Timer,
)
from lfforge.lf.lexer import KEYWORDS

_UNITS = ["ns", "us", "ms", "s", "sec", "seconds", "minutes", "hours"]
_WORDS = ["alpha", "beta", "gamma", "delta", "probe", "relay", "pulse", "gate", "sense"]


def ident(rng: random.Random, prefix: str = "") -> str:
    while True:
        name = prefix + rng.choice(_WORDS) + (str(rng.randrange(100)) if rng.random() < 0.7 else "")
        if name not in KEYWORDS:
            return name


def time_expr(rng: random.Random) -> TimeExpr:
    roll = rng.random()
    if roll < 0.2:
        return TimeExpr("0", 0, None)
    if roll < 0.85:
        value = rng.randrange(0, 5000)
        unit = rng.choice(_UNITS)
        return TimeExpr(f"{value} {unit}", value, unit)
    if roll < 0.95:
        value = rng.randrange(1, 100)
        return TimeExpr(str(value), value, None)  # missing unit: parses, fails LF007
    return TimeExpr(ident(rng), None, None)  # parameter reference


def host_code(rng: random.Random) -> HostCode:
    pieces = [rng.choice(["self->n++;", "lf_set(out, 1);", 'printf("x");', "x = { 1, 2 };", ""])]
    if rng.random() < 0.3:
        pieces.append("\n        " + rng.choice(_WORDS) + "();\n    ")
    text = " " + " ".join(p for p in pieces if p) + " "
    assert "=}" not in text
    return HostCode(text)


def random_model(rng: random.Random) -> Model:
    """A syntactically well-formed model; validity is not guaranteed."""
    reactors = []
    main_at = rng.randrange(0, 3)
    used_names: set[str] = set()
    for i in range(rng.randint(1, 4)):
        name = ident(rng, "R")
        while name in used_names:
            name = ident(rng, "R")
        used_names.add(name)
        reactors.append(_random_reactor(rng, name, is_main=(i == main_at)))
    target = rng.choice([None, "C", "Cpp", "Python", "Rust"])
    return Model(target=target, reactors=tuple(reactors))


def _random_reactor(rng: random.Random, name: str, is_main: bool) -> ReactorDef:
    params = ()
    if not is_main and rng.random() < 0.3:
        params = tuple(
            Param(ident(rng, "p"), rng.choice([None, "int", "time"]),
                  rng.choice([None, "3", "1 s"]))
            for _ in range(rng.randint(1, 2))
        )
    elements = []
    names: set[str] = set()

    def fresh(prefix: str) -> str:
        candidate = ident(rng, prefix)
        while candidate in names:
            candidate = ident(rng, prefix)
        names.add(candidate)
        return candidate

    for _ in range(rng.randint(0, 7)):
        kind = rng.randrange(7)
        if kind == 0:
            elements.append(Input(fresh("in_"), rng.choice([None, "int", "u32"])))
        elif kind == 1:
            elements.append(Output(fresh("out_"), rng.choice([None, "int"])))
        elif kind == 2:
            offset = rng.choice([None, time_expr(rng)])
            period = time_expr(rng) if offset is not None and rng.random() < 0.7 else None
            label = rng.choice([None, "tick", "heart beat"])
            elements.append(Timer(fresh("t_"), offset, period, label))
        elif kind == 3:
            init = rng.choice([None, time_expr(rng)])
            elements.append(State(fresh("s_"), rng.choice([None, "int"]), init))
        elif kind == 4:
            triggers = tuple(
                Ref(None, ident(rng)) if rng.random() < 0.7 else Ref(ident(rng), ident(rng))
                for _ in range(rng.randint(0, 3))
            )
            effects = tuple(Ref(None, ident(rng)) for _ in range(rng.randint(0, 2)))
            elements.append(Reaction(triggers, effects, host_code(rng)))
        elif kind == 5:
            args = tuple(
                (ident(rng, "a"), rng.choice(["1", "2 s", "x"])) for _ in range(rng.randint(0, 2))
            )
            elements.append(Instantiation(fresh("i_"), ident(rng, "R"), args))
        else:
            elements.append(
                Connection(Ref(ident(rng), ident(rng)), Ref(ident(rng), ident(rng)))
            )
    return ReactorDef(name=name, is_main=is_main, params=params, elements=tuple(elements))


# -- random tool arguments -------------------------------------------------------


def schema_valid_args(rng: random.Random, schema) -> dict:
    """Arguments satisfying the schema: required params always present,
    optional ones coin-flipped, values shaped for their grammar slot."""
    args: dict = {}
    for param in schema.parameters:
        if param.optional and rng.random() < 0.4:
            continue
        args[param.name] = _value_for(rng, param)
    return args


def _value_for(rng: random.Random, param) -> object:
    if param.json_type == "boolean":
        return rng.random() < 0.5
    if param.json_type == "integer":
        return rng.randrange(0, 10000)
    if param.json_type == "array-of-string":
        return [_scalar_for(rng, param) for _ in range(rng.randint(1, 3))]
    return _scalar_for(rng, param)


def _scalar_for(rng: random.Random, param) -> str:
    source = getattr(param, "source_type", "ID")
    if source == "Expression":
        expr = time_expr(rng)
        return expr.text
    if source == "Attribute":
        return f'@label("{rng.choice(_WORDS)}")'
    if source in ("Ref", "PortRef"):
        if rng.random() < 0.5:
            return f"{ident(rng)}.{ident(rng)}"
        return ident(rng)
    if source == "CODE":
        code = rng.choice(["x++;", 'printf("%d", 1);', "lf_set(out, 0);", "pass"])
        assert "=}" not in code
        return code
    return ident(rng)


# -- random diagram graphs ---------------------------------------------------------


def random_diagram(rng: random.Random, max_nodes: int = 60) -> DiagramGraph:
    """Nested compound graph (depth <= 2) with edges valid per container."""
    counter = [0]
    budget = [rng.randint(2, max_nodes)]

    def new_id() -> str:
        counter[0] += 1
        return f"n{counter[0]:03d}"

    def make_leaf(parent_path: str) -> DiagNode:
        node_id = f"{parent_path}/{new_id()}"
        kind = rng.choice(["timer", "reaction", "instance", "port-proxy"])
        node = DiagNode(node_id, kind, node_id.rsplit('/', 1)[-1],
                        min_width=rng.choice([30.0, 44.0, 60.0]),
                        min_height=rng.choice([24.0, 34.0]))
        for i in range(rng.randint(0, 2)):
            node.ports.append(DiagPort(f"{node_id}:w{i}", WEST, f"w{i}"))
        for i in range(rng.randint(1, 2)):
            node.ports.append(DiagPort(f"{node_id}:e{i}", EAST, f"e{i}"))
        budget[0] -= 1
        return node

    def make_container(path_prefix: str, depth: int) -> DiagNode:
        node_id = f"{path_prefix}/{new_id()}"
        node = DiagNode(node_id, "reactor" if depth == 0 else "instance",
                        node_id.rsplit('/', 1)[-1], min_width=90.0, min_height=50.0)
        for i in range(rng.randint(0, 2)):
            node.ports.append(DiagPort(f"{node_id}:in{i}", WEST, f"in{i}"))
        for i in range(rng.randint(0, 2)):
            node.ports.append(DiagPort(f"{node_id}:out{i}", EAST, f"out{i}"))
        budget[0] -= 1
        n_children = rng.randint(0, min(6, max(0, budget[0])))
        for _ in range(n_children):
            if budget[0] <= 0:
                break
            if depth + 1 < 2 and rng.random() < 0.25:
                node.children.append(make_container(node_id, depth + 1))
            else:
                node.children.append(make_leaf(node_id))
        return node

    roots = []
    while budget[0] > 0 and len(roots) < 3:
        roots.append(make_container("", 0))
    graph = DiagramGraph(roots, [])

    edge_n = [0]

    def add_edges(container: DiagNode) -> None:
        members = container.children
        for _ in range(rng.randint(0, 2 * max(1, len(members)))):
            candidates_src = [
                p for m in members for p in m.ports if p.side == EAST
            ] + [p for p in container.ports if p.side == WEST]
            candidates_dst = [
                p for m in members for p in m.ports if p.side == WEST
            ] + [p for p in container.ports if p.side == EAST]
            if not candidates_src or not candidates_dst:
                break
            src = rng.choice(candidates_src)
            dst = rng.choice(candidates_dst)
            edge_n[0] += 1
            graph.edges.append(
                DiagEdge(
                    f"e{edge_n[0]:03d}",
                    src.id,
                    dst.id,
                    rng.choice(["connection", "trigger", "effect"]),
                )
            )
        for member in members:
            if member.children or rng.random() < 0.1:
                add_edges(member)

    for root in roots:
        add_edges(root)
    return graph


# -- independent oracles ------------------------------------------------------------


def toposort_succeeds(nodes: list[str], edges: list[tuple[str, str]]) -> bool:
    """Kahn's algorithm as an acyclicity oracle."""
    indeg = {n: 0 for n in nodes}
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for src, dst in edges:
        succ[src].append(dst)
        indeg[dst] += 1
    queue = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while queue:
        node = queue.pop()
        seen += 1
        for nxt in succ[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    return seen == len(nodes)


def brute_force_crossings(layers: list[list[str]], edges: list[tuple[str, str]]) -> int:
    """O(e^2) pair counting between every consecutive layer pair."""
    position = {}
    layer_index = {}
    for li, layer in enumerate(layers):
        for i, node in enumerate(layer):
            position[node] = i
            layer_index[node] = li
    total = 0
    spans = [
        (layer_index[s], position[s], position[t])
        for s, t in edges
        if t in layer_index and s in layer_index and layer_index[t] == layer_index[s] + 1
    ]
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            l1, a1, b1 = spans[i]
            l2, a2, b2 = spans[j]
            if l1 != l2:
                continue
            if (a1 < a2 and b1 > b2) or (a1 > a2 and b1 < b2):
                total += 1
    return total


def rects_overlap(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> bool:
    """Strict interior intersection; touching borders is not an overlap."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def sibling_overlaps(laid_out) -> list[tuple[str, str]]:
    """All pairs of same-container nodes whose rectangles intersect."""
    by_id = {n.id: n for n in laid_out.nodes}
    groups: list[list[str]] = [list(laid_out.root_ids)]
    for node in laid_out.nodes:
        if node.children_ids:
            groups.append(list(node.children_ids))
    bad = []
    for group in groups:
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a, b = by_id[group[i]], by_id[group[j]]
                if rects_overlap((a.x, a.y, a.w, a.h), (b.x, b.y, b.w, b.h)):
                    bad.append((a.id, b.id))
    return bad


def containment_violations(laid_out, padding: float) -> list[str]:
    by_id = {n.id: n for n in laid_out.nodes}
    bad = []
    eps = 1e-6
    for parent in laid_out.nodes:
        for child_id in parent.children_ids:
            child = by_id[child_id]
            if (
                child.x < parent.x + padding - eps
                or child.y < parent.y + padding - eps
                or child.x + child.w > parent.x + parent.w - padding + eps
                or child.y + child.h > parent.y + parent.h - padding + eps
            ):
                bad.append(child_id)
    return bad
