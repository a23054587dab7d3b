"""Built-in deployments: the workshop-style demo and simple test worlds."""

from __future__ import annotations

from .. import pathgraph as pg

C = pg.ColorId


def make_demo_deployment() -> pg.Deployment:
    """U-shaped corridor with a diagonal shortcut at the T-intersection.

    The shortcut (edge 3) is the faster way to the destination; disabling it
    mid-run forces a live reroute around the U.
    """
    a = (1.5, 1.5)
    b = (9.0, 1.5)
    c = (9.0, 6.5)
    d = (1.5, 6.5)
    nodes = (
        pg.Node(0, a, pg.NodeKind.POI, "entrance"),
        pg.Node(1, b, pg.NodeKind.INTERSECTION, "junction"),
        pg.Node(2, c, pg.NodeKind.INTERSECTION, "far corner"),
        pg.Node(3, d, pg.NodeKind.POI, "reading room"),
    )
    edges = (
        pg.Edge(0, 0, 1, (a, b), (C.RED, C.BLUE)),
        pg.Edge(1, 1, 2, (b, c), (C.GREEN, C.YELLOW)),
        pg.Edge(2, 2, 3, (c, d), (C.RED, C.BLUE)),
        pg.Edge(3, 1, 3, (b, d), (C.MAGENTA, C.CYAN)),
    )
    anchors = (
        pg.QrAnchor(1, 0, a),
        pg.QrAnchor(2, 1, b),
        pg.QrAnchor(3, 2, c),
        pg.QrAnchor(4, 3, d),
    )
    return pg.Deployment(
        deployment_id=100,
        version=1,
        nodes=nodes,
        edges=edges,
        anchors=anchors,
        floor_bounds=(0.0, 0.0, 10.5, 8.0),
    )


def make_straight_world(length: float = 5.0) -> pg.Deployment:
    """One straight edge along +x; start POI at node 0, goal POI at node 1."""
    a = (1.5, 3.0)
    b = (1.5 + length, 3.0)
    return pg.Deployment(
        deployment_id=101,
        version=1,
        nodes=(
            pg.Node(0, a, pg.NodeKind.POI, "start"),
            pg.Node(1, b, pg.NodeKind.POI, "goal"),
        ),
        edges=(pg.Edge(0, 0, 1, (a, b), (C.RED, C.BLUE)),),
        anchors=(pg.QrAnchor(1, 0, a), pg.QrAnchor(2, 1, b)),
        floor_bounds=(0.0, 0.0, length + 3.0, 6.0),
    )


def demo_scenario(patch_at: float | None = None) -> "SimConfig":
    """Run configuration for the demo; optionally disable the shortcut at
    `patch_at` simulated seconds."""
    from .run import SimConfig

    patches = ()
    if patch_at is not None:
        patches = ((patch_at, 3, False),)
    return SimConfig(
        deployment=make_demo_deployment(),
        start_node=0,
        dest_node=3,
        start_back=1.2,
        patches=patches,
        timeout_s=120.0,
    )
