"""Phone-side state machine: frames + touch in, vibration and server traffic out.

Whole-device haptics: one boolean per tick, true only when the user's touch
sits on the detected lane area and the lane matches the assigned edge.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from . import pathgraph as pg
from .markers import MarkerKind
from .protocol import Guidance, NextEdge
from .scene import Frame
from .vision import (
    LaneDetection,
    VisionParams,
    detect_lane,
    detect_markers,
    segment_colors,
)

TouchPoint = Optional[tuple[int, int]]  # (u, v) or None

ACQUIRE_TICKS = 3  # debounce for edge acquisition / loss
MARKER_RETRIGGER_S = 5.0  # same tag may re-trigger after this long


class Mode(Enum):
    SEARCHING = "searching"
    ON_EDGE = "on_edge"
    AT_NODE = "at_node"
    ARRIVED = "arrived"


@dataclass(frozen=True)
class HapticState:
    active: bool
    pulse_rate: float = 5.0  # Hz; perception favors 1-10 Hz modulation
    duty: float = 0.5

    def __post_init__(self) -> None:
        if not 1.0 <= self.pulse_rate <= 10.0:
            raise ValueError("pulse_rate outside 1-10 Hz")
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must be in (0, 1)")


@dataclass(frozen=True)
class Assignment:
    edge: int
    direction: pg.TravelDirection
    expected_pair: tuple[pg.ColorId, pg.ColorId]
    remaining_distance: float


@dataclass(frozen=True)
class NavEvent:
    kind: str  # marker_seen | guidance_received | edge_acquired | edge_lost | arrived
    tick: int
    data: dict


@dataclass(frozen=True)
class ResolveRequest:
    qr_id: int


@dataclass(frozen=True)
class NavState:
    mode: Mode = Mode.SEARCHING
    assigned: Assignment | None = None
    last_node: int | None = None
    session: int | None = None
    deployment_version_seen: int = 0
    offline_copy: pg.Deployment | None = None
    destination: int | None = None
    last_marker_id: int | None = None
    last_marker_time: float = -math.inf
    match_streak: int = 0
    mismatch_streak: int = 0
    acquired: bool = False


@dataclass(frozen=True)
class StepResult:
    state: NavState
    haptic: HapticState
    events: tuple[NavEvent, ...]
    request: ResolveRequest | None
    detection: LaneDetection | None


def vibration_sample(h: HapticState, t: float) -> bool:
    """Square-wave sample of the whole-device vibration at time t."""
    if not h.active:
        return False
    frac = (t * h.pulse_rate) % 1.0
    return frac < h.duty


def touch_feedback(
    det: LaneDetection | None,
    assigned_pair: tuple[pg.ColorId, pg.ColorId] | None,
    touch: TouchPoint,
    p: VisionParams = VisionParams(),
) -> bool:
    """True iff the touch lands on the (dilated) lane area of a matching lane."""
    if det is None or touch is None:
        return False
    if assigned_pair is not None and det.ordered_pair != assigned_pair:
        return False
    u, v = touch
    h, w = det.lane_mask.shape
    if not (0 <= u < w and 0 <= v < h):
        return False
    if det.lane_mask[v, u]:
        return True
    r = p.dilation_radius
    vs0, vs1 = max(0, v - r), min(h, v + r + 1)
    us0, us1 = max(0, u - r), min(w, u + r + 1)
    sub = det.lane_mask[vs0:vs1, us0:us1]
    if not sub.any():
        return False
    vv, uu = np.nonzero(sub)
    d2 = (vv + vs0 - v) ** 2 + (uu + us0 - u) ** 2
    return bool(d2.min() <= r * r)


def offline_next_edge(d: pg.Deployment, at: int, dest: int) -> Guidance:
    """Local equivalent of the server's QR resolution; raises NoRouteError."""
    if at == dest:
        return Guidance(at, True, None, d.version)
    route = pg.shortest_route(d, at, dest, enabled_only=True)
    eid, direction = route[0]
    edge = d.edge_by_id(eid)
    return Guidance(
        node=at,
        destination_reached=False,
        next=NextEdge(
            edge=eid,
            direction=direction,
            expected_pair=pg.observed_pair(edge, direction),
            remaining_distance=pg.route_length(d, route),
        ),
        deployment_version=d.version,
    )


def handle_guidance(
    state: NavState, g: Guidance, tick: int
) -> tuple[NavState, tuple[NavEvent, ...]]:
    """Merge a server (or offline) answer into the navigator state."""
    events = [NavEvent("guidance_received", tick, _guidance_summary(g))]
    if g.destination_reached:
        state = replace(
            state,
            mode=Mode.ARRIVED,
            assigned=None,
            last_node=g.node,
            deployment_version_seen=g.deployment_version,
            acquired=False,
            match_streak=0,
            mismatch_streak=0,
        )
        events.append(NavEvent("arrived", tick, {"node": g.node}))
        return state, tuple(events)
    assert g.next is not None
    assigned = Assignment(
        edge=g.next.edge,
        direction=g.next.direction,
        expected_pair=g.next.expected_pair,
        remaining_distance=g.next.remaining_distance,
    )
    reset_streaks = state.assigned is None or state.assigned.edge != assigned.edge
    state = replace(
        state,
        mode=Mode.AT_NODE,
        assigned=assigned,
        last_node=g.node,
        deployment_version_seen=g.deployment_version,
        acquired=False if reset_streaks else state.acquired,
        match_streak=0 if reset_streaks else state.match_streak,
        mismatch_streak=0 if reset_streaks else state.mismatch_streak,
    )
    return state, tuple(events)


def handle_resolve_failure(state: NavState) -> NavState:
    """Degraded mode: keep the last assignment, allow an immediate retry."""
    return replace(state, last_marker_id=None, last_marker_time=-math.inf)


def step(
    state: NavState,
    frame: Frame,
    touch: TouchPoint,
    tick: int,
    t: float,
    vp: VisionParams = VisionParams(),
    haptic_params: HapticState = HapticState(active=False),
) -> StepResult:
    """One camera tick: sense, update mode, decide haptics and server traffic."""
    mask = segment_colors(frame, vp)
    det = detect_lane(mask, vp)
    tags = detect_markers(mask, vp)

    events: list[NavEvent] = []
    request: ResolveRequest | None = None

    node_tags = [p for p, _ in tags.found if p.kind is MarkerKind.NODE]
    if node_tags:
        payload = min(node_tags, key=lambda p: p.id)
        fresh = (
            payload.id != state.last_marker_id
            or t - state.last_marker_time >= MARKER_RETRIGGER_S
        )
        if fresh:
            events.append(NavEvent("marker_seen", tick, {"qr_id": payload.id}))
            state = replace(state, last_marker_id=payload.id, last_marker_time=t)
            if state.offline_copy is not None and state.destination is not None:
                try:
                    node = state.offline_copy.anchor_by_qr(payload.id).node
                    g = offline_next_edge(state.offline_copy, node, state.destination)
                    state, ev = handle_guidance(state, g, tick)
                    events.extend(ev)
                except (KeyError, pg.NoRouteError):
                    pass  # keep previous assignment
            else:
                request = ResolveRequest(qr_id=payload.id)

    # edge acquisition debounce against the assigned expected pair
    match = det is not None and (
        state.assigned is None or det.ordered_pair == state.assigned.expected_pair
    )
    if match:
        streak = state.match_streak + 1
        state = replace(state, match_streak=streak, mismatch_streak=0)
        if streak >= ACQUIRE_TICKS and not state.acquired:
            state = replace(state, acquired=True)
            events.append(
                NavEvent(
                    "edge_acquired",
                    tick,
                    {"edge": state.assigned.edge if state.assigned else None},
                )
            )
            if state.assigned is not None and state.mode is not Mode.ARRIVED:
                state = replace(state, mode=Mode.ON_EDGE)
    else:
        streak = state.mismatch_streak + 1
        state = replace(state, mismatch_streak=streak, match_streak=0)
        if streak >= ACQUIRE_TICKS and state.acquired:
            state = replace(state, acquired=False)
            events.append(
                NavEvent(
                    "edge_lost",
                    tick,
                    {"edge": state.assigned.edge if state.assigned else None},
                )
            )
            if state.mode is Mode.ON_EDGE:
                state = replace(state, mode=Mode.SEARCHING)

    active = touch_feedback(
        det,
        state.assigned.expected_pair if state.assigned else None,
        touch,
        vp,
    )
    haptic = replace(haptic_params, active=active)
    return StepResult(
        state=state, haptic=haptic, events=tuple(events), request=request, detection=det
    )


def _guidance_summary(g: Guidance) -> dict:
    return {
        "node": g.node,
        "destination_reached": g.destination_reached,
        "edge": g.next.edge if g.next else None,
        "direction": g.next.direction.value if g.next else None,
        "expected_pair": [c.name for c in g.next.expected_pair] if g.next else None,
        "remaining_distance": round(g.next.remaining_distance, 3) if g.next else None,
        "deployment_version": g.deployment_version,
    }
