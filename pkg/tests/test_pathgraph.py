import math
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanenav import pathgraph as pg
from oracles import (
    brute_force_planarity_violations,
    floyd_warshall_distances,
    lexmin_route,
    random_connected_deployment,
    random_edge_set,
)


def _edge(eid, a, b, pa, pb, c1=pg.ColorId.RED, c2=pg.ColorId.BLUE, enabled=True):
    return pg.Edge(
        id=eid, from_node=a, to_node=b, polyline=(pa, pb), color_pair=(c1, c2), enabled=enabled
    )


# ---------------------------------------------------------------------------
# color-pair orientation semantics


def test_observed_pair_forward_is_declared_order():
    e = _edge(0, 0, 1, (0, 0), (1, 0), pg.ColorId.GREEN, pg.ColorId.YELLOW)
    assert pg.observed_pair(e, pg.TravelDirection.FORWARD) == (
        pg.ColorId.GREEN,
        pg.ColorId.YELLOW,
    )
    assert pg.observed_pair(e, pg.TravelDirection.BACKWARD) == (
        pg.ColorId.YELLOW,
        pg.ColorId.GREEN,
    )


@given(
    c1=st.sampled_from(pg.PALETTE),
    c2=st.sampled_from(pg.PALETTE),
    direction=st.sampled_from(list(pg.TravelDirection)),
)
def test_observed_pair_reverses_with_direction(c1, c2, direction):
    e = _edge(0, 0, 1, (0, 0), (1, 0), c1, c2)
    assert pg.observed_pair(e, direction) == tuple(
        reversed(pg.observed_pair(e, direction.reverse()))
    )


def test_leaving_pair_matches_travel_direction():
    e = _edge(0, 5, 7, (0, 0), (1, 0), pg.ColorId.MAGENTA, pg.ColorId.CYAN)
    assert pg.leaving_pair(e, 5) == (pg.ColorId.MAGENTA, pg.ColorId.CYAN)
    assert pg.leaving_pair(e, 7) == (pg.ColorId.CYAN, pg.ColorId.MAGENTA)


def test_direction_reverse_is_involution():
    for d in pg.TravelDirection:
        assert d.reverse().reverse() is d


# ---------------------------------------------------------------------------
# geometry


def test_point_segment_distance_examples():
    assert pg.point_segment_distance((0, 1), (0, 0), (2, 0)) == pytest.approx(1.0)
    assert pg.point_segment_distance((3, 0), (0, 0), (2, 0)) == pytest.approx(1.0)
    assert pg.point_segment_distance((1, 0), (1, 0), (1, 0)) == pytest.approx(0.0)


def test_cross_track_distance_uses_nearest_polyline_segment():
    e = pg.Edge(
        id=0,
        from_node=0,
        to_node=1,
        polyline=((0, 0), (2, 0), (2, 2)),
        color_pair=(pg.ColorId.RED, pg.ColorId.BLUE),
    )
    assert pg.cross_track_distance((1, 0.5), e) == pytest.approx(0.5)
    assert pg.cross_track_distance((2.5, 1.0), e) == pytest.approx(0.5)


def test_segments_properly_interact_examples():
    assert pg.segments_properly_interact((0, 0), (2, 2), (0, 2), (2, 0)) == pytest.approx(
        (1.0, 1.0)
    )
    assert pg.segments_properly_interact((0, 0), (1, 0), (2, 0), (3, 0)) is None
    # collinear overlap reports the overlap midpoint
    w = pg.segments_properly_interact((0, 0), (2, 0), (1, 0), (3, 0))
    assert w == pytest.approx((1.5, 0.0))
    # shared endpoint is still an interaction (the validator decides whether
    # it happens at a node)
    assert pg.segments_properly_interact((0, 0), (1, 0), (1, 0), (1, 1)) is not None


# ---------------------------------------------------------------------------
# validation


def test_demo_deployment_is_valid(demo):
    assert pg.validate_deployment(demo) == []


def test_validation_flags_ambiguous_leaving_pairs(demo):
    # give two edges at node 1 the same leaving pair
    e0 = demo.edge_by_id(0)  # node0 -> node1, seen backward from node1
    e1 = demo.edge_by_id(1)  # node1 -> node2
    bad_pair = pg.leaving_pair(e0, 1)
    edges = tuple(
        replace(e, color_pair=bad_pair) if e.id == 1 else e for e in demo.edges
    )
    report = pg.validate_deployment(replace(demo, edges=edges))
    assert any(v.code == "ambiguous_pair" and 1 in v.ids for v in report)


def test_validation_flags_crossing_edges():
    nodes = tuple(
        pg.Node(id=i, position=p)
        for i, p in enumerate([(0, 0), (4, 4), (0, 4), (4, 0)])
    )
    edges = (
        _edge(0, 0, 1, (0, 0), (4, 4), pg.ColorId.RED, pg.ColorId.BLUE),
        _edge(1, 2, 3, (0, 4), (4, 0), pg.ColorId.GREEN, pg.ColorId.YELLOW),
    )
    anchors = tuple(
        pg.QrAnchor(qr_id=i + 1, node=i, position=n.position) for i, n in enumerate(nodes)
    )
    d = pg.Deployment(1, 1, nodes, edges, anchors, (-1, -1, 5, 5))
    report = pg.validate_deployment(d)
    assert any(v.code == "planarity" and set(v.ids) == {0, 1} for v in report)


def test_validation_allows_edges_meeting_at_shared_node():
    nodes = tuple(
        pg.Node(id=i, position=p) for i, p in enumerate([(0, 0), (2, 0), (2, 2)])
    )
    edges = (
        _edge(0, 0, 1, (0, 0), (2, 0), pg.ColorId.RED, pg.ColorId.BLUE),
        _edge(1, 1, 2, (2, 0), (2, 2), pg.ColorId.GREEN, pg.ColorId.YELLOW),
    )
    anchors = tuple(
        pg.QrAnchor(qr_id=i + 1, node=i, position=n.position) for i, n in enumerate(nodes)
    )
    d = pg.Deployment(1, 1, nodes, edges, anchors, (-1, -1, 3, 3))
    assert pg.validate_deployment(d) == []


def test_validation_flags_missing_anchor(demo):
    d = replace(demo, anchors=demo.anchors[1:])
    report = pg.validate_deployment(d)
    assert any(v.code == "missing_anchor" for v in report)


def test_validation_flags_close_nodes(demo):
    n0 = demo.nodes[0]
    moved = replace(n0, position=(demo.nodes[1].position[0] + 0.1, demo.nodes[1].position[1]))
    d = replace(demo, nodes=(moved,) + demo.nodes[1:])
    report = pg.validate_deployment(d)
    assert any(v.code == "node_separation" for v in report)


def test_validation_flags_out_of_bounds(demo):
    d = replace(demo, floor_bounds=(0.0, 0.0, 2.0, 2.0))
    report = pg.validate_deployment(d)
    assert any(v.code == "out_of_bounds" for v in report)


def test_planarity_matches_brute_force_oracle():
    rng = random.Random(42)
    for _ in range(100):
        d = random_edge_set(rng)
        report = pg.validate_deployment(d)
        flagged = {
            frozenset(v.ids) for v in report if v.code == "planarity"
        }
        oracle = brute_force_planarity_violations(d)
        assert flagged == oracle, pg.dumps_deployment(d)


# ---------------------------------------------------------------------------
# routing


def test_shortest_route_demo(demo):
    # node0 -> node3: direct branch (edges 0,3: 7.5 + ~9.01) beats the
    # perimeter (edges 0,1,2: 20.0)
    route = pg.shortest_route(demo, 0, 3)
    assert [eid for eid, _ in route] == [0, 3]
    assert route[0][1] is pg.TravelDirection.FORWARD


def test_shortest_route_same_node_is_empty(demo):
    assert pg.shortest_route(demo, 2, 2) == []


def test_shortest_route_unknown_node_raises(demo):
    with pytest.raises(KeyError):
        pg.shortest_route(demo, 0, 99)


def test_shortest_route_respects_enabled_only(demo):
    d = demo.with_edge_enabled(3, False)
    route = pg.shortest_route(d, 0, 3, enabled_only=True)
    assert [eid for eid, _ in route] == [0, 1, 2]
    # without the flag the disabled edge is still usable
    assert [eid for eid, _ in pg.shortest_route(d, 0, 3)] == [0, 3]


def test_shortest_route_no_route_raises():
    nodes = (pg.Node(0, (0, 0)), pg.Node(1, (5, 0)))
    anchors = (pg.QrAnchor(1, 0, (0, 0)), pg.QrAnchor(2, 1, (5, 0)))
    d = pg.Deployment(1, 1, nodes, (), anchors, (-1, -1, 6, 1))
    with pytest.raises(pg.NoRouteError):
        pg.shortest_route(d, 0, 1)


def test_tie_break_prefers_smaller_edge_id_sequence():
    # two equal-length two-hop routes 0-1-3 and 0-2-3; edge ids chosen so the
    # lexicographically smaller sequence goes through node 2
    nodes = tuple(
        pg.Node(id=i, position=p)
        for i, p in enumerate([(0, 0), (2, 1), (2, -1), (4, 0)])
    )
    edges = (
        _edge(0, 0, 2, (0, 0), (2, -1), pg.ColorId.RED, pg.ColorId.BLUE),
        _edge(1, 0, 1, (0, 0), (2, 1), pg.ColorId.GREEN, pg.ColorId.YELLOW),
        _edge(2, 1, 3, (2, 1), (4, 0), pg.ColorId.MAGENTA, pg.ColorId.CYAN),
        _edge(3, 2, 3, (2, -1), (4, 0), pg.ColorId.YELLOW, pg.ColorId.GREEN),
    )
    anchors = tuple(
        pg.QrAnchor(qr_id=i + 1, node=i, position=n.position) for i, n in enumerate(nodes)
    )
    d = pg.Deployment(1, 1, nodes, edges, anchors, (-1, -2, 5, 2))
    route = pg.shortest_route(d, 0, 3)
    assert [eid for eid, _ in route] == [0, 3]


def test_routing_against_oracles_small_sample():
    rng = random.Random(7)
    for _ in range(10):
        d = random_connected_deployment(rng, max_nodes=9)
        ids, idx, dist = floyd_warshall_distances(d)
        for s in ids:
            for t in ids:
                route = pg.shortest_route(d, s, t)
                assert pg.route_length(d, route) == pytest.approx(
                    dist[idx[s]][idx[t]], abs=1e-9
                )
                oracle = lexmin_route(d, s, t)
                assert [e for e, _ in route] == [e for e, _ in oracle]


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_route_length_is_sum_of_edge_lengths(seed):
    rng = random.Random(seed)
    d = random_connected_deployment(rng, max_nodes=6)
    route = pg.shortest_route(d, 0, len(d.nodes) - 1)
    expected = sum(d.edge_by_id(eid).length() for eid, _ in route)
    assert pg.route_length(d, route) == pytest.approx(expected)


# ---------------------------------------------------------------------------
# serialization


def test_serde_roundtrip(demo):
    text = pg.dumps_deployment(demo)
    back = pg.loads_deployment(text)
    assert back == demo
    assert pg.dumps_deployment(back) == text


def test_serde_preserves_disabled_edges(demo):
    d = demo.with_edge_enabled(3, False)
    back = pg.loads_deployment(pg.dumps_deployment(d))
    assert not back.edge_by_id(3).enabled


def test_with_edge_enabled_unknown_edge_raises(demo):
    with pytest.raises(KeyError):
        demo.with_edge_enabled(42, False)
