"""Planar path graphs: nodes, strip-pair edges, validation, routing, JSON serde.

A deployment models paths physically taped on a floor.  Every edge carries an
ordered color pair; the left-to-right strip order seen by a walker encodes the
travel direction along the edge.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

Point = tuple[float, float]

MIN_NODE_SEPARATION = 0.5  # meters; keeps lanes of distinct edges from overlapping
_EPS = 1e-9


class ColorId(Enum):
    RED = (220, 30, 30)
    GREEN = (30, 180, 60)
    BLUE = (30, 60, 220)
    YELLOW = (230, 220, 40)
    MAGENTA = (200, 40, 200)
    CYAN = (40, 200, 210)

    @property
    def rgb(self) -> tuple[int, int, int]:
        return self.value


PALETTE: tuple[ColorId, ...] = tuple(ColorId)  # closed, totally ordered


class NodeKind(Enum):
    INTERSECTION = "intersection"
    POI = "poi"


class TravelDirection(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    def reverse(self) -> "TravelDirection":
        return (
            TravelDirection.BACKWARD
            if self is TravelDirection.FORWARD
            else TravelDirection.FORWARD
        )


@dataclass(frozen=True)
class Node:
    id: int
    position: Point
    kind: NodeKind = NodeKind.INTERSECTION
    label: str | None = None


@dataclass(frozen=True)
class Edge:
    id: int
    from_node: int
    to_node: int
    polyline: tuple[Point, ...]
    color_pair: tuple[ColorId, ColorId]
    enabled: bool = True

    def length(self) -> float:
        return polyline_length(self.polyline)


@dataclass(frozen=True)
class QrAnchor:
    qr_id: int
    node: int
    position: Point
    size: float = 0.20


@dataclass(frozen=True)
class Deployment:
    deployment_id: int
    version: int
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    anchors: tuple[QrAnchor, ...]
    floor_bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def node_by_id(self, node_id: int) -> Node:
        return self._node_index()[node_id]

    def edge_by_id(self, edge_id: int) -> Edge:
        return self._edge_index()[edge_id]

    def anchor_by_qr(self, qr_id: int) -> QrAnchor:
        for a in self.anchors:
            if a.qr_id == qr_id:
                return a
        raise KeyError(qr_id)

    def _node_index(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    def _edge_index(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    def with_edge_enabled(self, edge_id: int, enabled: bool) -> "Deployment":
        edges = tuple(
            replace(e, enabled=enabled) if e.id == edge_id else e for e in self.edges
        )
        if not any(e.id == edge_id for e in self.edges):
            raise KeyError(edge_id)
        return replace(self, edges=edges)


@dataclass(frozen=True)
class Violation:
    code: str
    ids: tuple[int, ...]
    message: str


ValidationReport = list[Violation]


class NoRouteError(Exception):
    """No path exists between the requested nodes under the given constraint."""


# ---------------------------------------------------------------------------
# geometry helpers


def polyline_length(points: Sequence[Point]) -> float:
    return sum(math.dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.dist(p, a)
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = min(1.0, max(0.0, t))
    return math.dist(p, (ax + t * dx, ay + t * dy))


def cross_track_distance(p: Point, e: Edge) -> float:
    """Minimum Euclidean distance from p to the edge polyline."""
    return min(
        point_segment_distance(p, e.polyline[i], e.polyline[i + 1])
        for i in range(len(e.polyline) - 1)
    )


def segments_properly_interact(
    a1: Point, a2: Point, b1: Point, b2: Point
) -> Point | None:
    """Return an intersection/overlap witness point of two segments, or None.

    Uses the parametric formulation; collinear overlaps report the midpoint of
    the overlap interval.
    """
    ax, ay = a1
    bx, by = a2
    cx, cy = b1
    dx, dy = b2
    r = (bx - ax, by - ay)
    s = (dx - cx, dy - cy)
    denom = r[0] * s[1] - r[1] * s[0]
    qp = (cx - ax, cy - ay)
    qpxr = qp[0] * r[1] - qp[1] * r[0]
    if abs(denom) < _EPS:
        if abs(qpxr) > _EPS:
            return None  # parallel, non-collinear
        # collinear: project onto r
        rr = r[0] * r[0] + r[1] * r[1]
        if rr < _EPS:
            return a1 if point_segment_distance(a1, b1, b2) < _EPS else None
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi + _EPS:
            return None
        tm = (lo + hi) / 2.0
        return (ax + tm * r[0], ay + tm * r[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = qpxr / denom
    if -_EPS <= t <= 1 + _EPS and -_EPS <= u <= 1 + _EPS:
        return (ax + t * r[0], ay + t * r[1])
    return None


# ---------------------------------------------------------------------------
# operations


def observed_pair(e: Edge, direction: TravelDirection) -> tuple[ColorId, ColorId]:
    """Left-to-right strip colors seen by a walker facing along `direction`."""
    c1, c2 = e.color_pair
    return (c1, c2) if direction is TravelDirection.FORWARD else (c2, c1)


def leaving_pair(e: Edge, node_id: int) -> tuple[ColorId, ColorId]:
    """Observed pair for a walker leaving `node_id` along e."""
    direction = (
        TravelDirection.FORWARD if e.from_node == node_id else TravelDirection.BACKWARD
    )
    return observed_pair(e, direction)


def validate_deployment(d: Deployment, node_tol: float = 1e-6) -> ValidationReport:
    """Check the physical-deployment rules; one violation entry per breach."""
    report: ValidationReport = []
    node_positions = {n.id: n.position for n in d.nodes}

    # (a) planar embedding: segments may only touch at shared node positions
    segs: list[tuple[int, int, Point, Point]] = []  # (edge_id, seg_idx, p, q)
    for e in sorted(d.edges, key=lambda e: e.id):
        for i in range(len(e.polyline) - 1):
            segs.append((e.id, i, e.polyline[i], e.polyline[i + 1]))
    for i in range(len(segs)):
        ei, si, p1, p2 = segs[i]
        for j in range(i + 1, len(segs)):
            ej, sj, q1, q2 = segs[j]
            if ei == ej and abs(si - sj) <= 1:
                continue  # same edge, adjacent segments share a bend vertex
            w = segments_properly_interact(p1, p2, q1, q2)
            if w is None:
                continue
            at_node = any(
                math.dist(w, pos) <= node_tol for pos in node_positions.values()
            )
            if not at_node:
                report.append(
                    Violation(
                        "planarity",
                        (ei, ej),
                        f"edges {ei} and {ej} intersect at {w} away from any node",
                    )
                )

    # (b) per-node ambiguity of leaving pairs
    incident: dict[int, list[Edge]] = {n.id: [] for n in d.nodes}
    for e in d.edges:
        incident.setdefault(e.from_node, []).append(e)
        incident.setdefault(e.to_node, []).append(e)
    for node_id in sorted(incident):
        seen: dict[tuple[ColorId, ColorId], int] = {}
        for e in sorted(incident[node_id], key=lambda e: e.id):
            pair = leaving_pair(e, node_id)
            if pair in seen:
                report.append(
                    Violation(
                        "ambiguous_pair",
                        (node_id, seen[pair], e.id),
                        f"node {node_id}: edges {seen[pair]} and {e.id} both leave "
                        f"with pair ({pair[0].name}, {pair[1].name})",
                    )
                )
            else:
                seen[pair] = e.id

    # (c) every node anchored
    anchored = {a.node for a in d.anchors}
    for n in sorted(d.nodes, key=lambda n: n.id):
        if n.id not in anchored:
            report.append(
                Violation("missing_anchor", (n.id,), f"node {n.id} has no QR anchor")
            )

    # (d) node separation
    nodes = sorted(d.nodes, key=lambda n: n.id)
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if math.dist(nodes[i].position, nodes[j].position) < MIN_NODE_SEPARATION:
                report.append(
                    Violation(
                        "node_separation",
                        (nodes[i].id, nodes[j].id),
                        f"nodes {nodes[i].id} and {nodes[j].id} closer than "
                        f"{MIN_NODE_SEPARATION} m",
                    )
                )

    # (e) geometry inside floor bounds
    xmin, ymin, xmax, ymax = d.floor_bounds

    def inside(p: Point) -> bool:
        return xmin - _EPS <= p[0] <= xmax + _EPS and ymin - _EPS <= p[1] <= ymax + _EPS

    for n in sorted(d.nodes, key=lambda n: n.id):
        if not inside(n.position):
            report.append(
                Violation("out_of_bounds", (n.id,), f"node {n.id} outside floor bounds")
            )
    for e in sorted(d.edges, key=lambda e: e.id):
        if not all(inside(p) for p in e.polyline):
            report.append(
                Violation("out_of_bounds", (e.id,), f"edge {e.id} outside floor bounds")
            )
    for a in sorted(d.anchors, key=lambda a: a.qr_id):
        if not inside(a.position):
            report.append(
                Violation(
                    "out_of_bounds", (a.qr_id,), f"anchor {a.qr_id} outside floor bounds"
                )
            )

    return report


def shortest_route(
    d: Deployment, from_node: int, to_node: int, enabled_only: bool = False
) -> list[tuple[int, TravelDirection]]:
    """Length-minimal route; ties broken by lexicographically smallest edge-id
    sequence.  Raises NoRouteError when unreachable."""
    index = d._node_index()
    if from_node not in index or to_node not in index:
        raise KeyError("unknown node id")
    if from_node == to_node:
        return []

    adj: dict[int, list[tuple[float, int, int, TravelDirection]]] = {}
    for e in sorted(d.edges, key=lambda e: e.id):
        if enabled_only and not e.enabled:
            continue
        w = e.length()
        adj.setdefault(e.from_node, []).append((w, e.id, e.to_node, TravelDirection.FORWARD))
        adj.setdefault(e.to_node, []).append((w, e.id, e.from_node, TravelDirection.BACKWARD))

    # heap entries: (dist, edge_id_sequence, node, route).  Positive edge
    # lengths make the lexicographic tie-break prefix-safe.
    heap: list[tuple[float, tuple[int, ...], int, tuple[tuple[int, TravelDirection], ...]]] = [
        (0.0, (), from_node, ())
    ]
    done: set[int] = set()
    while heap:
        dist, seq, node, route = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == to_node:
            return list(route)
        for w, eid, other, direction in adj.get(node, []):
            if other not in done:
                heapq.heappush(
                    heap, (dist + w, seq + (eid,), other, route + ((eid, direction),))
                )
    raise NoRouteError(f"no route from {from_node} to {to_node}")


def route_length(d: Deployment, route: Iterable[tuple[int, TravelDirection]]) -> float:
    return sum(d.edge_by_id(eid).length() for eid, _ in route)


# ---------------------------------------------------------------------------
# JSON serialization (the on-disk repository / offline-download format)


def _round_point(p: Point) -> list[float]:
    return [round(p[0], 3), round(p[1], 3)]


def deployment_to_dict(d: Deployment) -> dict:
    return {
        "deployment_id": d.deployment_id,
        "version": d.version,
        "nodes": [
            {
                "id": n.id,
                "position": _round_point(n.position),
                "kind": n.kind.value,
                "label": n.label,
            }
            for n in d.nodes
        ],
        "edges": [
            {
                "id": e.id,
                "from": e.from_node,
                "to": e.to_node,
                "polyline": [_round_point(p) for p in e.polyline],
                "color_pair": [e.color_pair[0].name, e.color_pair[1].name],
                "enabled": e.enabled,
            }
            for e in d.edges
        ],
        "anchors": [
            {
                "qr_id": a.qr_id,
                "node": a.node,
                "position": _round_point(a.position),
                "size": round(a.size, 3),
            }
            for a in d.anchors
        ],
        "floor_bounds": [round(v, 3) for v in d.floor_bounds],
    }


def deployment_from_dict(doc: dict) -> Deployment:
    nodes = tuple(
        Node(
            id=n["id"],
            position=(float(n["position"][0]), float(n["position"][1])),
            kind=NodeKind(n.get("kind", "intersection")),
            label=n.get("label"),
        )
        for n in doc["nodes"]
    )
    edges = tuple(
        Edge(
            id=e["id"],
            from_node=e["from"],
            to_node=e["to"],
            polyline=tuple((float(p[0]), float(p[1])) for p in e["polyline"]),
            color_pair=(ColorId[e["color_pair"][0]], ColorId[e["color_pair"][1]]),
            enabled=bool(e.get("enabled", True)),
        )
        for e in doc["edges"]
    )
    anchors = tuple(
        QrAnchor(
            qr_id=a["qr_id"],
            node=a["node"],
            position=(float(a["position"][0]), float(a["position"][1])),
            size=float(a.get("size", 0.20)),
        )
        for a in doc["anchors"]
    )
    fb = doc["floor_bounds"]
    return Deployment(
        deployment_id=doc["deployment_id"],
        version=doc["version"],
        nodes=nodes,
        edges=edges,
        anchors=anchors,
        floor_bounds=(float(fb[0]), float(fb[1]), float(fb[2]), float(fb[3])),
    )


def dumps_deployment(d: Deployment) -> str:
    return json.dumps(deployment_to_dict(d), indent=2) + "\n"


def loads_deployment(text: str) -> Deployment:
    return deployment_from_dict(json.loads(text))
