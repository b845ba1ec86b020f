"""Deterministic SVG rendering of models.

The pipeline is layout -> scene -> SVG. Styles come from the effective
block's nuances (shape, fill, badge, icon-slot, edge-style) plus the
validator's marker diagnostics, which surface as red "!" badges. Identical
inputs produce byte-identical SVG; all geometry uses fixed metrics so golden
files stay stable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .core import BlockbenchError, EDGE, KindTable, Model, ModelElement, NODE, parse_selector
from .registry import EffectiveBlock
from .validation import Diagnostic, bound_elements, validate

RADIUS = 40.0
VGAP = 60.0
HGAP = 60.0
PADDING = 40.0
MIN_VIEWPORT = 100.0
BOW = 24.0

# Fixed palette for the distinct-fill policy, assigned in element order.
PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b4",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#9c755f",
)

GLYPHS = {
    "check": "✓",
    "cross": "✗",
    "bars": "≡",
    "gear": "⚙",
    "i": "i",
    "f": "f",
    "!": "!",
}

_HALF_EXTENTS = {
    "circle": (RADIUS, RADIUS),
    "oval": (RADIUS * 1.25, RADIUS * 0.8),
    "rect": (RADIUS * 1.15, RADIUS * 0.75),
}


class RenderBindingError(BlockbenchError):
    """The model does not bind to the block, so no scene can be computed."""


# ---------------------------------------------------------------------------
# Style resolution


@dataclass(frozen=True)
class BadgeStyle:
    glyph: str
    corner: str
    color: str
    by: str


@dataclass
class NodeStyle:
    shape: str = "rect"
    shape_by: str | None = None
    fill: str = "white"
    fill_by: str | None = None
    fill_fixed: bool = False
    badges: list[BadgeStyle] = field(default_factory=list)
    icon: str | None = None
    icon_color: str = "black"
    icon_by: str | None = None


@dataclass
class EdgeStyle:
    stroke: str = "black"
    stroke_by: str | None = None
    markers: list[BadgeStyle] = field(default_factory=list)


@dataclass
class StyleResolution:
    """Resolved visual properties per element, each with the nuance id that set it."""

    nodes: dict[tuple[str, str], NodeStyle] = field(default_factory=dict)
    edges: dict[tuple[str, str], EdgeStyle] = field(default_factory=dict)
    column: list[tuple[str, str]] = field(default_factory=list)
    column_by: str | None = None


def resolve_styles(
    model: Model, block: EffectiveBlock, diags: list[Diagnostic]
) -> StyleResolution:
    """Apply the block's nuances to the model's elements.

    Nuances apply in effective order, later ones overwriting earlier ones per
    property, with one exception: a fixed fill color is never displaced by a
    palette policy.
    """
    kinds = KindTable(block.elements)
    elements = bound_elements(model, block)
    res = StyleResolution()
    for el in elements:
        kind = kinds.get(el.kind)
        if kind is None:
            continue
        if kind.role == NODE:
            res.nodes[(el.kind, el.name)] = NodeStyle()
        elif kind.role == EDGE:
            res.edges[(el.kind, el.name)] = EdgeStyle()

    def node_style(el: ModelElement) -> NodeStyle | None:
        return res.nodes.get((el.kind, el.name))

    for nuance in block.nuances:
        params = nuance.params
        effect = nuance.effect
        if effect in ("shape", "layout-order") and "order" in params:
            selector = parse_selector(params["selector"])
            wanted = [piece.strip() for piece in params["order"].split(",")]
            matched = {el.name: el for el in elements if selector.matches(el)}
            res.column = [
                (matched[name].kind, name) for name in wanted if name in matched
            ]
            res.column_by = nuance.id
        if effect == "shape":
            selector = parse_selector(params["selector"])
            for el in elements:
                style = node_style(el)
                if style is not None and selector.matches(el):
                    style.shape = params["shape"]
                    style.shape_by = nuance.id
        elif effect == "fill":
            selector = parse_selector(params["selector"])
            matched = [el for el in elements if selector.matches(el) and node_style(el)]
            if "color" in params:
                for el in matched:
                    style = node_style(el)
                    style.fill = params["color"]
                    style.fill_by = nuance.id
                    style.fill_fixed = True
            else:
                for idx, el in enumerate(matched):
                    style = node_style(el)
                    if style.fill_fixed:
                        continue
                    style.fill = PALETTE[idx % len(PALETTE)]
                    style.fill_by = nuance.id
            if "icon" in params:
                for el in matched:
                    style = node_style(el)
                    style.icon = params["icon"]
                    style.icon_color = params.get("icon-color", "black")
                    style.icon_by = nuance.id
        elif effect == "badge":
            corner = params.get("corner", "top-left")
            color = params.get("color", "black")
            mappings = {
                k: v for k, v in params.items() if k not in ("kind", "attr", "corner", "color")
            }
            for el in elements:
                style = node_style(el)
                if style is None or el.kind != params["kind"]:
                    continue
                value = el.attr(params["attr"])
                if value is not None and str(value) in mappings:
                    style.badges.append(
                        BadgeStyle(mappings[str(value)], corner, color, nuance.id)
                    )
        elif effect == "icon-slot":
            for el in elements:
                style = node_style(el)
                if style is None or el.kind != params["kind"]:
                    continue
                value = el.attr(params["attr"])
                if value is not None and str(value):
                    style.icon = str(value)
                    style.icon_color = params.get("icon-color", "black")
                    style.icon_by = nuance.id
        elif effect == "edge-style":
            condition = params.get("when-missing")
            for key, style in res.edges.items():
                kind_name, name = key
                if kind_name != params["kind"]:
                    continue
                el = next(e for e in elements if (e.kind, e.name) == key)
                if condition is None or condition not in el.attrs:
                    style.stroke = params["color"]
                    style.stroke_by = nuance.id

    # Marker diagnostics become red "!" badges, one per (diagnostic, target).
    for diag in diags:
        if not diag.nuance_marker:
            continue
        for target in diag.targets:
            key = _find_target(res, block.nuance(diag.nuance_marker), target)
            if key is None:
                continue
            badge = BadgeStyle("!", "top-right", "red", diag.nuance_marker)
            if key in res.nodes:
                res.nodes[key].badges.append(badge)
            else:
                res.edges[key].markers.append(badge)
    return res


def _find_target(res: StyleResolution, nuance, name: str) -> tuple[str, str] | None:
    """Locate the styled element a diagnostic target names."""
    if nuance is not None:
        kind = nuance.params.get("kind")
        if kind is None and "root" in nuance.params:
            selector = parse_selector(nuance.params["root"])
            kind = selector.kind if selector else None
        if kind is not None:
            key = (kind, name)
            if key in res.nodes or key in res.edges:
                return key
    hits = [key for key in (*res.nodes, *res.edges) if key[1] == name]
    return hits[0] if len(hits) == 1 else None


# ---------------------------------------------------------------------------
# Scene


@dataclass(frozen=True)
class SceneBadge:
    glyph: str
    corner: str
    color: str


@dataclass(frozen=True)
class SceneNode:
    name: str
    kind: str
    x: float
    y: float
    rx: float
    ry: float
    shape: str
    fill: str
    badges: tuple[SceneBadge, ...] = ()
    icon: str | None = None
    icon_color: str = "black"


@dataclass(frozen=True)
class SceneEdge:
    name: str
    kind: str
    source: str
    target: str
    points: tuple[tuple[float, float], ...]  # start, control(s), end
    stroke: str
    markers: tuple[SceneBadge, ...] = ()


@dataclass(frozen=True)
class Scene:
    width: float
    height: float
    nodes: tuple[SceneNode, ...] = ()
    edges: tuple[SceneEdge, ...] = ()


def _fatal_binding(diags: list[Diagnostic]) -> str | None:
    if len(diags) == 1 and diags[0].code == "binding" and not diags[0].targets:
        return diags[0].message
    return None


def layout(
    model: Model, block: EffectiveBlock, diags: list[Diagnostic] | None = None
) -> Scene:
    """Compute the scene for a model: positions, routed edges, applied styles.

    Ordered nodes (a nuance with an order param) form a vertical column, top
    to bottom as declared; everything else falls back to layered placement by
    BFS rank from the block's reachability roots, ties broken by name.
    """
    if diags is None:
        diags = validate(model, block)
    fatal = _fatal_binding(diags)
    if fatal is not None:
        raise RenderBindingError(fatal)
    styles = resolve_styles(model, block, diags)
    kinds = KindTable(block.elements)
    elements = bound_elements(model, block)
    nodes = [el for el in elements if kinds.get(el.kind).role == NODE]
    edges = [el for el in elements if kinds.get(el.kind).role == EDGE]
    by_key = {(el.kind, el.name): el for el in elements}

    rows: list[list[ModelElement]] = []
    placed: set[tuple[str, str]] = set()
    for key in styles.column:
        if key in by_key and key not in placed:
            rows.append([by_key[key]])
            placed.add(key)
    for rank_nodes in _ranked(nodes, edges, kinds, block, placed):
        rows.append(rank_nodes)

    centers: dict[tuple[str, str], tuple[float, float]] = {}
    y = PADDING + RADIUS
    for row in rows:
        x = PADDING + RADIUS
        for el in sorted(row, key=lambda e: e.name):
            centers[(el.kind, el.name)] = (x, y)
            x += 2 * RADIUS + HGAP
        y += 2 * RADIUS + VGAP

    scene_nodes = []
    for el in nodes:
        style = styles.nodes[(el.kind, el.name)]
        rx, ry = _HALF_EXTENTS.get(style.shape, _HALF_EXTENTS["rect"])
        cx, cy = centers[(el.kind, el.name)]
        scene_nodes.append(
            SceneNode(
                name=el.name,
                kind=el.kind,
                x=cx,
                y=cy,
                rx=rx,
                ry=ry,
                shape=style.shape,
                fill=style.fill,
                badges=tuple(SceneBadge(_glyph(b.glyph), b.corner, b.color) for b in style.badges),
                icon=_glyph(style.icon) if style.icon else None,
                icon_color=style.icon_color,
            )
        )

    pair_counts: dict[tuple, int] = {}
    scene_edges = []
    for el in sorted(edges, key=lambda e: (e.kind, e.name)):
        kind = kinds.get(el.kind)
        skey = (kind.source_kind, str(el.attrs["source"]))
        tkey = (kind.target_kind, str(el.attrs["target"]))
        style = styles.edges[(el.kind, el.name)]
        lane = pair_counts.get((skey, tkey), 0)
        pair_counts[(skey, tkey)] = lane + 1
        points = _route(centers[skey], tkey == skey, centers[tkey], _node_extents(styles, skey), _node_extents(styles, tkey), lane)
        scene_edges.append(
            SceneEdge(
                name=el.name,
                kind=el.kind,
                source=str(el.attrs["source"]),
                target=str(el.attrs["target"]),
                points=points,
                stroke=style.stroke,
                markers=tuple(SceneBadge(_glyph(b.glyph), b.corner, b.color) for b in style.markers),
            )
        )

    max_x = max((centers[k][0] + RADIUS for k in centers), default=0.0)
    max_y = max((centers[k][1] + RADIUS for k in centers), default=0.0)
    width = max(MIN_VIEWPORT, max_x + PADDING)
    height = max(MIN_VIEWPORT, max_y + PADDING)
    return Scene(width=width, height=height, nodes=tuple(scene_nodes), edges=tuple(scene_edges))


def _glyph(name: str) -> str:
    return GLYPHS.get(name, name)


def _node_extents(styles: StyleResolution, key: tuple[str, str]) -> tuple[float, float]:
    style = styles.nodes.get(key)
    if style is None:
        return _HALF_EXTENTS["rect"]
    return _HALF_EXTENTS.get(style.shape, _HALF_EXTENTS["rect"])


def _ranked(
    nodes: list[ModelElement],
    edges: list[ModelElement],
    kinds: KindTable,
    block: EffectiveBlock,
    placed: set[tuple[str, str]],
) -> list[list[ModelElement]]:
    """Layered fallback: BFS depth from the reachability roots (or sources)."""
    remaining = [el for el in nodes if (el.kind, el.name) not in placed]
    if not remaining:
        return []
    adjacency: dict[tuple[str, str], list[tuple[str, str]]] = {}
    incoming: dict[tuple[str, str], int] = {(el.kind, el.name): 0 for el in nodes}
    for el in edges:
        kind = kinds.get(el.kind)
        skey = (kind.source_kind, str(el.attrs["source"]))
        tkey = (kind.target_kind, str(el.attrs["target"]))
        adjacency.setdefault(skey, []).append(tkey)
        if tkey in incoming:
            incoming[tkey] += 1

    roots: list[tuple[str, str]] = []
    root_selector = next(
        (
            parse_selector(c.params["root"])
            for c in block.constraints
            if c.kind == "reachability" and parse_selector(c.params["root"]) is not None
        ),
        None,
    )
    if root_selector is not None:
        roots = [(el.kind, el.name) for el in remaining if root_selector.matches(el)]
    if not roots:
        roots = [key for key in ((el.kind, el.name) for el in remaining) if incoming[key] == 0]
    if not roots:
        first = min(remaining, key=lambda e: (e.kind, e.name))
        roots = [(first.kind, first.name)]

    rank: dict[tuple[str, str], int] = {key: 0 for key in roots}
    frontier = sorted(roots)
    depth = 0
    while frontier:
        nxt: list[tuple[str, str]] = []
        for key in frontier:
            for neighbor in adjacency.get(key, ()):
                if neighbor in incoming and neighbor not in rank:
                    rank[neighbor] = depth + 1
                    nxt.append(neighbor)
        frontier = sorted(set(nxt))
        depth += 1

    by_key = {(el.kind, el.name): el for el in remaining}
    unreached = sorted(key for key in by_key if key not in rank)
    overflow = (max(rank.values()) + 1) if rank else 0
    for key in unreached:
        rank[key] = overflow

    rows: dict[int, list[ModelElement]] = {}
    for key, el in by_key.items():
        rows.setdefault(rank[key], []).append(el)
    return [rows[r] for r in sorted(rows)]


def _route(
    source: tuple[float, float],
    self_loop: bool,
    target: tuple[float, float],
    source_extents: tuple[float, float],
    target_extents: tuple[float, float],
    lane: int,
) -> tuple[tuple[float, float], ...]:
    sx, sy = source
    tx, ty = target
    if self_loop:
        rx, ry = source_extents
        return (
            (sx + rx, sy),
            (sx + rx + 50.0, sy - ry - 30.0),
            (sx, sy - ry - 50.0),
            (sx, sy - ry),
        )
    dx, dy = tx - sx, ty - sy
    length = math.hypot(dx, dy) or 1.0
    ux, uy = dx / length, dy / length
    start = (sx + ux * _boundary(source_extents, ux, uy), sy + uy * _boundary(source_extents, ux, uy))
    end = (tx - ux * _boundary(target_extents, ux, uy), ty - uy * _boundary(target_extents, ux, uy))
    # Bow to the left of the travel direction; opposite edges separate naturally.
    bow = BOW + lane * 16.0
    px, py = -uy, ux
    control = ((start[0] + end[0]) / 2 + px * bow, (start[1] + end[1]) / 2 + py * bow)
    return (start, control, end)


def _boundary(extents: tuple[float, float], ux: float, uy: float) -> float:
    rx, ry = extents
    return (rx * ry) / math.hypot(ry * ux, rx * uy)


# ---------------------------------------------------------------------------
# SVG emission

_BADGE_OFFSETS = {
    "top-left": (-1.0, -1.0),
    "top-right": (1.0, -1.0),
    "bottom-left": (-1.0, 1.0),
    "bottom-right": (1.0, 1.0),
}


def _fmt(value: float) -> str:
    return f"{value:.1f}"


def _marker_id(color: str) -> str:
    return "arrow-" + re.sub(r"[^A-Za-z0-9-]", "", color)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def render_svg(scene: Scene) -> str:
    """Standalone SVG 1.1 text; byte-identical for equal scenes."""
    lines: list[str] = []
    width, height = _fmt(scene.width), _fmt(scene.height)
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    stroke_colors = sorted({edge.stroke for edge in scene.edges})
    if stroke_colors:
        lines.append("  <defs>")
        for color in stroke_colors:
            lines.append(
                f'    <marker id="{_marker_id(color)}" viewBox="0 0 8 8" refX="8" refY="4"'
                ' markerWidth="8" markerHeight="8" orient="auto">'
            )
            lines.append(f'      <path d="M0,0 L8,4 L0,8 z" fill="{_escape(color)}"/>')
            lines.append("    </marker>")
        lines.append("  </defs>")
    lines.append('  <g class="nodes">')
    for node in sorted(scene.nodes, key=lambda n: (n.name, n.kind)):
        lines.extend(_render_node(node))
    lines.append("  </g>")
    lines.append('  <g class="edges">')
    for edge in sorted(scene.edges, key=lambda e: (e.name, e.kind)):
        lines.extend(_render_edge(edge))
    lines.append("  </g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _render_node(node: SceneNode) -> list[str]:
    x, y = node.x, node.y
    out = [f'    <g class="node" data-kind="{_escape(node.kind)}" data-name="{_escape(node.name)}">']
    fill = _escape(node.fill)
    if node.shape == "circle":
        out.append(
            f'      <circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(node.rx)}"'
            f' fill="{fill}" stroke="black"/>'
        )
    elif node.shape == "oval":
        out.append(
            f'      <ellipse cx="{_fmt(x)}" cy="{_fmt(y)}" rx="{_fmt(node.rx)}" ry="{_fmt(node.ry)}"'
            f' fill="{fill}" stroke="black"/>'
        )
    else:
        out.append(
            f'      <rect x="{_fmt(x - node.rx)}" y="{_fmt(y - node.ry)}"'
            f' width="{_fmt(2 * node.rx)}" height="{_fmt(2 * node.ry)}" rx="6.0"'
            f' fill="{fill}" stroke="black"/>'
        )
    out.append(
        f'      <text x="{_fmt(x)}" y="{_fmt(y + 4)}" text-anchor="middle"'
        f' font-size="13">{_escape(node.name)}</text>'
    )
    if node.icon:
        out.append(
            f'      <text x="{_fmt(x)}" y="{_fmt(y + 22)}" text-anchor="middle"'
            f' font-size="14" fill="{_escape(node.icon_color)}">{_escape(node.icon)}</text>'
        )
    for badge in node.badges:
        ox, oy = _BADGE_OFFSETS.get(badge.corner, _BADGE_OFFSETS["top-left"])
        bx = x + ox * (node.rx - 6)
        by = y + oy * (node.ry - 6) + (4 if oy < 0 else 8)
        out.append(
            f'      <text class="badge" x="{_fmt(bx)}" y="{_fmt(by)}" text-anchor="middle"'
            f' font-size="14" font-weight="bold" fill="{_escape(badge.color)}">'
            f"{_escape(badge.glyph)}</text>"
        )
    out.append("    </g>")
    return out


def _render_edge(edge: SceneEdge) -> list[str]:
    points = edge.points
    start, end = points[0], points[-1]
    controls = points[1:-1]
    if len(controls) == 1:
        d = (
            f"M{_fmt(start[0])},{_fmt(start[1])}"
            f" Q{_fmt(controls[0][0])},{_fmt(controls[0][1])}"
            f" {_fmt(end[0])},{_fmt(end[1])}"
        )
        mid = (
            0.25 * start[0] + 0.5 * controls[0][0] + 0.25 * end[0],
            0.25 * start[1] + 0.5 * controls[0][1] + 0.25 * end[1],
        )
    else:
        d = f"M{_fmt(start[0])},{_fmt(start[1])} C" + " ".join(
            f"{_fmt(px)},{_fmt(py)}" for px, py in (*controls, end)
        )
        mid = controls[0]
    stroke = _escape(edge.stroke)
    out = [
        f'    <g class="edge" data-kind="{_escape(edge.kind)}" data-name="{_escape(edge.name)}">',
        f'      <path d="{d}" fill="none" stroke="{stroke}" stroke-width="1.5"'
        f' marker-end="url(#{_marker_id(edge.stroke)})"/>',
    ]
    for idx, marker in enumerate(edge.markers):
        out.append(
            f'      <text class="badge" x="{_fmt(mid[0])}" y="{_fmt(mid[1] - 6 - idx * 14)}"'
            f' text-anchor="middle" font-size="14" font-weight="bold"'
            f' fill="{_escape(marker.color)}">{_escape(marker.glyph)}</text>'
        )
    out.append("    </g>")
    return out


def render_model(model: Model, block: EffectiveBlock) -> str:
    """validate + layout + render in one step; the CLI and service share it."""
    diags = validate(model, block)
    return render_svg(layout(model, block, diags))
