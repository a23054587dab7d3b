"""Wire-format types shared by the path server and the phone-side navigator."""

from __future__ import annotations

from dataclasses import dataclass

from .pathgraph import ColorId, TravelDirection


@dataclass(frozen=True)
class NextEdge:
    edge: int
    direction: TravelDirection
    expected_pair: tuple[ColorId, ColorId]
    remaining_distance: float  # full shortest-route length, meters


@dataclass(frozen=True)
class Guidance:
    node: int
    destination_reached: bool
    next: NextEdge | None
    deployment_version: int


def guidance_to_dict(g: Guidance) -> dict:
    doc: dict = {
        "node": g.node,
        "destination_reached": g.destination_reached,
        "deployment_version": g.deployment_version,
        "next": None,
    }
    if g.next is not None:
        doc["next"] = {
            "edge": g.next.edge,
            "direction": g.next.direction.value,
            "expected_pair": [c.name for c in g.next.expected_pair],
            "remaining_distance": round(g.next.remaining_distance, 3),
        }
    return doc


def guidance_from_dict(doc: dict) -> Guidance:
    nxt = None
    if doc.get("next") is not None:
        n = doc["next"]
        nxt = NextEdge(
            edge=n["edge"],
            direction=TravelDirection(n["direction"]),
            expected_pair=(ColorId[n["expected_pair"][0]], ColorId[n["expected_pair"][1]]),
            remaining_distance=float(n["remaining_distance"]),
        )
    return Guidance(
        node=doc["node"],
        destination_reached=bool(doc["destination_reached"]),
        next=nxt,
        deployment_version=int(doc["deployment_version"]),
    )
