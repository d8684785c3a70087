"""Layered layout for compound diagram graphs.

The classic pipeline, applied bottom-up over the containment tree:

  1. cycle breaking (greedy DFS, back edges reversed)
  2. layer assignment (longest path), dummy nodes for long edges
  3. crossing minimization (barycenter sweeps, best ordering kept)
  4. coordinate assignment (uniform column pitch, stacked rows)
  5. edge routing (polylines through dummy positions)

Everything is deterministic: ties break on lexicographic node id, so equal
graph plus equal config yields byte-equal output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import (
    EAST,
    WEST,
    DiagEdge,
    DiagNode,
    DiagramGraph,
    LaidOutDiagram,
    PlacedEdge,
    PlacedNode,
    PlacedPort,
)

LABEL_BAND = 18.0  # vertical strip reserved for a compound node's name


@dataclass(frozen=True)
class LayoutConfig:
    layer_spacing: float = 40.0
    node_spacing: float = 18.0
    padding: float = 12.0
    crossing_sweeps: int = 4

    def __post_init__(self) -> None:
        if self.layer_spacing <= 0 or self.node_spacing <= 0 or self.padding <= 0:
            raise ValueError("spacings and padding must be positive")
        if self.crossing_sweeps < 1:
            raise ValueError("crossing_sweeps must be at least 1")


# -- phase 1: cycle breaking ---------------------------------------------------


def break_cycles(
    nodes: list[str], edges: list[tuple[str, str, str]]
) -> tuple[list[tuple[str, str, str]], set[str]]:
    """Greedy DFS cycle breaking over (edge_id, src, dst) triples.

    Returns the edge list with back edges flipped, plus the ids of the
    reversed edges. Self loops are dropped (reversing cannot fix them). The
    result is acyclic; the reversed set is minimal only in the greedy sense.
    """
    succ: dict[str, list[tuple[str, str]]] = {n: [] for n in nodes}
    for edge_id, src, dst in edges:
        if src != dst:
            succ[src].append((edge_id, dst))
    for lst in succ.values():
        lst.sort()

    reversed_ids: set[str] = set()
    state: dict[str, int] = {}  # 0 unvisited (absent), 1 on stack, 2 done

    def dfs(start: str) -> None:
        stack: list[tuple[str, int]] = [(start, 0)]
        state[start] = 1
        while stack:
            node, i = stack[-1]
            out = succ[node]
            if i >= len(out):
                state[node] = 2
                stack.pop()
                continue
            stack[-1] = (node, i + 1)
            edge_id, nxt = out[i]
            mark = state.get(nxt, 0)
            if mark == 1:
                reversed_ids.add(edge_id)
            elif mark == 0:
                state[nxt] = 1
                stack.append((nxt, 0))

    for node in sorted(nodes):
        if state.get(node, 0) == 0:
            dfs(node)

    kept = [
        (edge_id, dst, src) if edge_id in reversed_ids else (edge_id, src, dst)
        for edge_id, src, dst in edges
        if src != dst
    ]
    return kept, reversed_ids


# -- phase 2: layering -----------------------------------------------------------


def assign_layers(nodes: list[str], edges: list[tuple[str, str, str]]) -> dict[str, int]:
    """Longest-path layering of an acyclic edge set; sources sit in layer 0."""
    preds: dict[str, list[str]] = {n: [] for n in nodes}
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    indeg: dict[str, int] = {n: 0 for n in nodes}
    for _, src, dst in edges:
        succ[src].append(dst)
        preds[dst].append(src)
        indeg[dst] += 1

    layer: dict[str, int] = {n: 0 for n in nodes}
    ready = sorted(n for n in nodes if indeg[n] == 0)
    order: list[str] = []
    pending = dict(indeg)
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in sorted(succ[node]):
            pending[nxt] -= 1
            if pending[nxt] == 0:
                ready.append(nxt)
        ready.sort()
    if len(order) != len(nodes):
        raise ValueError("assign_layers requires an acyclic edge set")
    for node in order:
        for p in preds[node]:
            layer[node] = max(layer[node], layer[p] + 1)
    return layer


# -- phase 3: crossing minimization ----------------------------------------------


def count_crossings(layers: list[list[str]], edges: list[tuple[str, str]]) -> int:
    """Pairwise crossing count between consecutive layers."""
    total = 0
    pos = {node: (li, i) for li, ordered in enumerate(layers) for i, node in enumerate(ordered)}
    by_gap: dict[int, list[tuple[int, int]]] = {}
    for src, dst in edges:
        (ls, ps), (ld, pd) = pos[src], pos[dst]
        if ld != ls + 1:
            continue
        by_gap.setdefault(ls, []).append((ps, pd))
    for pairs in by_gap.values():
        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                (a1, b1), (a2, b2) = pairs[i], pairs[j]
                if (a1 < a2 and b1 > b2) or (a1 > a2 and b1 < b2):
                    total += 1
    return total


def minimize_crossings(
    layers: list[list[str]], edges: list[tuple[str, str]], sweeps: int
) -> list[list[str]]:
    """Barycenter ordering, alternating downward and upward sweeps.

    The best ordering seen (including the initial one) is returned, so the
    final crossing count never exceeds the initial count.
    """
    preds: dict[str, list[str]] = {}
    succ: dict[str, list[str]] = {}
    for src, dst in edges:
        succ.setdefault(src, []).append(dst)
        preds.setdefault(dst, []).append(src)

    current = [list(layer) for layer in layers]
    best = [list(layer) for layer in current]
    best_count = count_crossings(current, edges)

    def sort_layer(index: int, neighbors: dict[str, list[str]], ref_index: int) -> None:
        ref_pos = {node: i for i, node in enumerate(current[ref_index])}
        def key(node: str) -> tuple[float, str]:
            anchors = [ref_pos[n] for n in neighbors.get(node, []) if n in ref_pos]
            if not anchors:
                return (float(current[index].index(node)), node)
            return (sum(anchors) / len(anchors), node)
        current[index] = sorted(current[index], key=key)

    for _ in range(sweeps):
        for i in range(1, len(current)):
            sort_layer(i, preds, i - 1)
        for i in range(len(current) - 2, -1, -1):
            sort_layer(i, succ, i + 1)
        count = count_crossings(current, edges)
        if count < best_count:
            best_count = count
            best = [list(layer) for layer in current]
    return best


# -- phase 4+5: coordinates and routing (per container) ---------------------------


@dataclass
class _Local:
    """Layout of one node in its own coordinate system (origin top-left)."""

    w: float
    h: float
    port_pos: dict[str, tuple[float, float]] = field(default_factory=dict)
    child_pos: dict[str, tuple[float, float]] = field(default_factory=dict)
    routes: list[tuple[str, list[tuple[float, float]]]] = field(default_factory=list)


class _Engine:
    def __init__(self, graph: DiagramGraph, cfg: LayoutConfig):
        self.graph = graph
        self.cfg = cfg
        self.port_owner: dict[str, str] = {}
        self.node_by_id: dict[str, DiagNode] = {}
        for node in graph.iter_nodes():
            self.node_by_id[node.id] = node
            for port in node.ports:
                self.port_owner[port.id] = node.id
        self.parent: dict[str, str | None] = {}
        for node in graph.iter_nodes():
            for child in node.children:
                self.parent[child.id] = node.id
        for root in graph.roots:
            self.parent[root.id] = None
        self.edges_by_container = self._assign_edges()
        self.local: dict[str, _Local] = {}

    _TOP = "<top>"

    def _assign_edges(self) -> dict[str, list[DiagEdge]]:
        out: dict[str, list[DiagEdge]] = {}
        for edge in self.graph.edges:
            owner_s = self.port_owner.get(edge.source)
            owner_t = self.port_owner.get(edge.target)
            if owner_s is None or owner_t is None:
                continue  # dangling edge; nothing to draw
            if owner_s == owner_t:
                container = self.parent.get(owner_s) or self._TOP
            elif self.parent.get(owner_s) == owner_t:
                container = owner_t
            elif self.parent.get(owner_t) == owner_s:
                container = owner_s
            else:
                container = self.parent.get(owner_s) or self._TOP
            out.setdefault(container, []).append(edge)
        return out

    def run(self) -> LaidOutDiagram:
        for root in self.graph.roots:
            self._layout_node(root)
        top = self._layout_members(
            self._TOP,
            self.graph.roots,
            self.edges_by_container.get(self._TOP, []),
            own_ports=[],
            label_band=0.0,
        )
        return self._assemble(top)

    # -- recursive per-node layout ------------------------------------------

    def _layout_node(self, node: DiagNode) -> _Local:
        for child in node.children:
            self._layout_node(child)
        if node.children:
            local = self._layout_members(
                node.id,
                node.children,
                self.edges_by_container.get(node.id, []),
                own_ports=node.ports,
                label_band=LABEL_BAND,
                min_size=(node.min_width, node.min_height),
            )
        else:
            local = _Local(w=node.min_width, h=node.min_height)
            self._place_ports(node, local)
        self.local[node.id] = local
        return local

    def _place_ports(self, node: DiagNode, local: _Local) -> None:
        west = [p for p in node.ports if p.side == WEST]
        east = [p for p in node.ports if p.side == EAST]
        for ports, x in ((west, 0.0), (east, local.w)):
            for i, port in enumerate(ports):
                y = (i + 1) * local.h / (len(ports) + 1)
                local.port_pos[port.id] = (x, y)

    def _layout_members(
        self,
        container_id: str,
        members: list[DiagNode],
        edges: list[DiagEdge],
        own_ports: list,
        label_band: float,
        min_size: tuple[float, float] = (0.0, 0.0),
    ) -> _Local:
        cfg = self.cfg
        local = _Local(w=0.0, h=0.0)
        if not members:
            local.w = max(2 * cfg.padding, min_size[0])
            local.h = max(2 * cfg.padding + label_band, min_size[1])
            return local

        member_ids = [m.id for m in members]
        member_set = set(member_ids)

        # project port-level edges onto member-level arcs
        arcs: list[tuple[str, str, str]] = []
        loops: list[DiagEdge] = []
        port_edges: list[DiagEdge] = []  # edges touching the container's own ports
        for edge in edges:
            src_owner = self.port_owner[edge.source]
            dst_owner = self.port_owner[edge.target]
            if src_owner == container_id or dst_owner == container_id:
                port_edges.append(edge)
            elif src_owner == dst_owner:
                loops.append(edge)
            elif src_owner in member_set and dst_owner in member_set:
                arcs.append((edge.id, src_owner, dst_owner))

        kept, reversed_ids = break_cycles(member_ids, arcs)
        layer_of = assign_layers(member_ids, kept)

        # dummy vertices for edges spanning more than one layer
        dummy_of_edge: dict[str, list[str]] = {}
        level_edges: list[tuple[str, str]] = []
        all_ids = list(member_ids)
        for edge_id, src, dst in kept:
            span = layer_of[dst] - layer_of[src]
            chain = [src]
            for k in range(1, span):
                dummy = f"__dummy:{edge_id}:{k}"
                layer_of[dummy] = layer_of[src] + k
                all_ids.append(dummy)
                chain.append(dummy)
            chain.append(dst)
            dummy_of_edge[edge_id] = chain[1:-1]
            for a, b in zip(chain, chain[1:]):
                level_edges.append((a, b))

        max_layer = max(layer_of.values(), default=0)
        layers: list[list[str]] = [[] for _ in range(max_layer + 1)]
        for node_id in sorted(all_ids):
            layers[layer_of[node_id]].append(node_id)
        ordered = minimize_crossings(layers, level_edges, cfg.crossing_sweeps)

        # coordinates: uniform column pitch, stacked rows
        def width_of(node_id: str) -> float:
            return 0.0 if node_id.startswith("__dummy:") else self.local[node_id].w

        def height_of(node_id: str) -> float:
            return 0.0 if node_id.startswith("__dummy:") else self.local[node_id].h

        max_w = max((width_of(n) for n in all_ids), default=0.0)
        pitch = max_w + cfg.layer_spacing
        top = cfg.padding + label_band
        positions: dict[str, tuple[float, float]] = {}
        for li, layer_nodes in enumerate(ordered):
            y = top
            for node_id in layer_nodes:
                positions[node_id] = (cfg.padding + li * pitch, y)
                y += height_of(node_id) + cfg.node_spacing

        # pull nodes toward the barycenter of their predecessors, keeping order
        preds: dict[str, list[str]] = {}
        for a, b in level_edges:
            preds.setdefault(b, []).append(a)
        for li in range(1, len(ordered)):
            floor = top
            for node_id in ordered[li]:
                x, y = positions[node_id]
                anchors = preds.get(node_id, [])
                centers = [
                    positions[a][1] + height_of(a) / 2 for a in anchors if a in positions
                ]
                if centers:
                    desired = sum(centers) / len(centers) - height_of(node_id) / 2
                    y = max(y, desired, floor)
                else:
                    y = max(y, floor)
                positions[node_id] = (x, y)
                floor = y + height_of(node_id) + cfg.node_spacing

        for member in members:
            local.child_pos[member.id] = positions[member.id]

        content_w = max(
            positions[n][0] + width_of(n) for n in all_ids
        )
        content_h = max(positions[n][1] + height_of(n) for n in all_ids)
        local.w = max(content_w + cfg.padding, min_size[0])
        local.h = max(content_h + cfg.padding, min_size[1])

        # container ports exist only once the size is fixed
        port_pos: dict[str, tuple[float, float]] = {}
        for member in members:
            mx, my = positions[member.id]
            for pid, (px, py) in self.local[member.id].port_pos.items():
                port_pos[pid] = (mx + px, my + py)

        own_pos: dict[str, tuple[float, float]] = {}
        west = [p for p in own_ports if p.side == WEST]
        east = [p for p in own_ports if p.side == EAST]
        for ports, x in ((west, 0.0), (east, local.w)):
            for i, port in enumerate(ports):
                own_pos[port.id] = (x, (i + 1) * local.h / (len(ports) + 1))
        port_pos.update(own_pos)
        local.port_pos.update(own_pos)

        # routing
        edge_by_id = {e.id: e for e in edges}

        def dummy_center(dummy_id: str) -> tuple[float, float]:
            x, y = positions[dummy_id]
            return (x, y)

        for edge_id, src, dst in kept:
            edge = edge_by_id[edge_id]
            flipped = edge_id in reversed_ids
            src_port = edge.target if flipped else edge.source
            dst_port = edge.source if flipped else edge.target
            points = [port_pos[src_port]]
            points.extend(dummy_center(d) for d in dummy_of_edge[edge_id])
            points.append(port_pos[dst_port])
            if len(points) == 2 and abs(points[0][1] - points[1][1]) > 0.5:
                x0, y0 = points[0]
                x1, y1 = points[1]
                xm = (x0 + x1) / 2
                points = [(x0, y0), (xm, y0), (xm, y1), (x1, y1)]
            if flipped:
                points.reverse()
            local.routes.append((edge_id, points))

        for edge in loops:
            src = port_pos[edge.source]
            dst = port_pos[edge.target]
            owner = self.port_owner[edge.source]
            oy = positions[owner][1]
            lane = oy - 8.0
            local.routes.append(
                (
                    edge.id,
                    [
                        src,
                        (src[0] + 14.0, src[1]),
                        (src[0] + 14.0, lane),
                        (dst[0] - 14.0, lane),
                        (dst[0] - 14.0, dst[1]),
                        dst,
                    ],
                )
            )

        for edge in port_edges:
            src = port_pos.get(edge.source)
            dst = port_pos.get(edge.target)
            if src is None or dst is None:
                continue
            if abs(src[1] - dst[1]) <= 0.5:
                points = [src, dst]
            else:
                xm = (src[0] + dst[0]) / 2
                points = [src, (xm, src[1]), (xm, dst[1]), dst]
            local.routes.append((edge.id, points))

        return local

    # -- assembly into absolute coordinates -----------------------------------

    def _assemble(self, top: _Local) -> LaidOutDiagram:
        out = LaidOutDiagram(root_ids=[r.id for r in self.graph.roots])
        edge_by_id = {e.id: e for e in self.graph.edges}

        def place(node: DiagNode, ox: float, oy: float) -> None:
            local = self.local[node.id]
            placed = PlacedNode(
                id=node.id,
                kind=node.kind,
                label=node.label,
                x=ox,
                y=oy,
                w=local.w,
                h=local.h,
                children_ids=[c.id for c in node.children],
            )
            for port in node.ports:
                px, py = local.port_pos[port.id]
                placed.ports.append(PlacedPort(port.id, port.side, port.label, ox + px, oy + py))
            out.nodes.append(placed)
            for edge_id, points in local.routes:
                out.edges.append(
                    PlacedEdge(
                        edge_id, edge_by_id[edge_id].kind, [(ox + x, oy + y) for x, y in points]
                    )
                )
            for child in node.children:
                cx, cy = local.child_pos[child.id]
                place(child, ox + cx, oy + cy)

        for root in self.graph.roots:
            rx, ry = top.child_pos[root.id]
            place(root, rx, ry)
        for edge_id, points in top.routes:
            out.edges.append(PlacedEdge(edge_id, edge_by_id[edge_id].kind, list(points)))
        out.edges.sort(key=lambda e: e.id)
        return out


def layout(graph: DiagramGraph, cfg: LayoutConfig | None = None) -> LaidOutDiagram:
    return _Engine(graph, cfg or LayoutConfig()).run()
