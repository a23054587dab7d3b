"""Closed-loop headless simulation: scene -> vision -> navigator -> server ->
agent, with a JSONL trace and recomputable metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .. import navigator as nav
from .. import pathgraph as pg
from .. import scene as sc
from ..protocol import Guidance, guidance_from_dict, guidance_to_dict
from ..server.core import AdminPatch, PathServer, SetEdgeEnabled
from ..vision import VisionParams
from .agent import AgentParams, AgentState, agent_step, sweep_angle, touch_point

TRACE_VERSION = 1


class TraceParseError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"trace line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class SimConfig:
    deployment: pg.Deployment
    start_node: int
    dest_node: int
    seed: int = 0
    agent: AgentParams = AgentParams()
    vision: VisionParams = VisionParams()
    camera: sc.CameraIntrinsics = sc.CameraIntrinsics()
    resolution: int = 100
    timeout_s: float = 120.0
    arrival_radius: float = 0.25
    start_offset: float = 0.0  # initial cross-track displacement, meters (left +)
    start_back: float = 0.0  # start this far before the start node
    haptics_enabled: bool = True
    noise_sigma: float = 0.0
    offline: bool = False  # navigate from a local deployment copy, no server
    server_url: str | None = None  # None = in-process server
    patches: tuple[tuple[float, int, bool], ...] = ()  # (t, edge, enabled)


@dataclass(frozen=True)
class RunMetrics:
    reached: bool
    time_to_goal: float  # seconds, inf when not reached
    mean_cross_track: float
    max_cross_track: float
    vibration_duty: float
    marker_scans: int
    reroutes: int

    def to_dict(self) -> dict:
        return {
            "reached": self.reached,
            "time_to_goal": None if math.isinf(self.time_to_goal) else self.time_to_goal,
            "mean_cross_track": self.mean_cross_track,
            "max_cross_track": self.max_cross_track,
            "vibration_duty": self.vibration_duty,
            "marker_scans": self.marker_scans,
            "reroutes": self.reroutes,
        }


# ---------------------------------------------------------------------------
# transports


class InProcessTransport:
    def __init__(self, server: PathServer):
        self.server = server
        self.round_trips = 0

    def create_session(self, destination: int) -> int:
        return self.server.create_session(destination)

    def resolve(self, qr_id: int, session: int) -> Guidance:
        self.round_trips += 1
        return self.server.resolve_qr(qr_id, session)

    def apply_patch(self, patch: AdminPatch) -> int:
        return self.server.apply_patch(patch)


class HttpTransport:
    def __init__(self, base_url: str):
        import httpx

        self.client = httpx.Client(base_url=base_url, timeout=0.2)
        self.round_trips = 0

    def create_session(self, destination: int) -> int:
        r = self.client.post("/session", json={"destination": destination})
        r.raise_for_status()
        return r.json()["session_id"]

    def resolve(self, qr_id: int, session: int) -> Guidance:
        self.round_trips += 1
        r = self.client.get(f"/qr/{qr_id}", params={"session": session})
        if r.status_code == 409:
            raise pg.NoRouteError(r.json().get("error", "no route"))
        r.raise_for_status()
        return guidance_from_dict(r.json())

    def apply_patch(self, patch: AdminPatch) -> int:
        from ..server.core import patch_to_dict

        r = self.client.put("/admin/patch", json=patch_to_dict(patch))
        r.raise_for_status()
        return r.json()["version"]


# ---------------------------------------------------------------------------
# start placement


def initial_pose(config: SimConfig) -> sc.Pose:
    d = config.deployment
    start = d.node_by_id(config.start_node)
    route = pg.shortest_route(d, config.start_node, config.dest_node, enabled_only=True)
    if route:
        eid, direction = route[0]
        edge = d.edge_by_id(eid)
        poly = edge.polyline if direction is pg.TravelDirection.FORWARD else edge.polyline[::-1]
        hx, hy = poly[1][0] - poly[0][0], poly[1][1] - poly[0][1]
    else:
        hx, hy = 1.0, 0.0
    norm = math.hypot(hx, hy)
    hx, hy = hx / norm, hy / norm
    lx, ly = -hy, hx  # left of heading
    x = start.position[0] - config.start_back * hx + config.start_offset * lx
    y = start.position[1] - config.start_back * hy + config.start_offset * ly
    return sc.Pose(
        position=(x, y),
        body_heading=math.atan2(hy, hx),
        phone_yaw_offset=sweep_angle(config.agent, 0.0),
    )


# ---------------------------------------------------------------------------
# the loop


def run_sim(config: SimConfig, trace_path=None) -> tuple[list[dict], RunMetrics]:
    """Run to arrival or timeout; returns (trace records, metrics).

    The trace's first record is a header carrying everything eval_trace needs
    (deployment snapshot, destination, thresholds); later records are ticks.
    """
    d = config.deployment
    if config.offline:
        transport = None
        server = None
    elif config.server_url:
        transport = HttpTransport(config.server_url)
        server = None
    else:
        server = PathServer(d, session_seed=config.seed)
        transport = InProcessTransport(server)

    raster = sc.rasterize_floor(d, resolution=config.resolution)
    dest_pos = d.node_by_id(config.dest_node).position

    state = nav.NavState(
        offline_copy=d if config.offline else None,
        destination=config.dest_node if config.offline else None,
    )
    session = None
    if transport is not None:
        session = transport.create_session(config.dest_node)
        state = replace(state, session=session)

    # the walker scans the anchor at the origin before setting off, which
    # yields the first edge assignment
    start_anchor = next(
        (a for a in d.anchors if a.node == config.start_node), None
    )
    initial_guidance = None
    if start_anchor is not None:
        try:
            if transport is not None:
                g = transport.resolve(start_anchor.qr_id, session)
            else:
                g = nav.offline_next_edge(d, config.start_node, config.dest_node)
            state, _ = nav.handle_guidance(state, g, 0)
            state = replace(
                state, last_marker_id=start_anchor.qr_id, last_marker_time=0.0
            )
            initial_guidance = guidance_to_dict(g)
        except pg.NoRouteError:
            pass

    agent = AgentState(pose=initial_pose(config))
    dt = 1.0 / config.agent.tick_rate
    max_ticks = int(config.timeout_s * config.agent.tick_rate)

    header = {
        "type": "header",
        "trace_version": TRACE_VERSION,
        "deployment": pg.deployment_to_dict(d),
        "start_node": config.start_node,
        "dest_node": config.dest_node,
        "dest_position": [dest_pos[0], dest_pos[1]],
        "arrival_radius": config.arrival_radius,
        "tick_rate": config.agent.tick_rate,
        "seed": config.seed,
        "haptics_enabled": config.haptics_enabled,
        "initial_guidance": initial_guidance,
    }
    records = [header]

    pending_patches = sorted(config.patches)
    patch_idx = 0
    reached = False
    time_to_goal = math.inf

    for tick in range(max_ticks):
        t = tick * dt
        while patch_idx < len(pending_patches) and t >= pending_patches[patch_idx][0]:
            _, edge_id, enabled = pending_patches[patch_idx]
            patch = AdminPatch(ops=(SetEdgeEnabled(edge_id, enabled),))
            if transport is not None:
                transport.apply_patch(patch)
            patch_idx += 1

        pose = agent.pose
        frame = sc.render_frame(
            raster,
            pose,
            config.camera,
            noise_sigma=config.noise_sigma,
            noise_seed=config.seed * 1_000_003 + tick,
        )
        touch = touch_point(config.agent, config.camera, t)

        result = nav.step(state, frame, touch, tick, t, config.vision)
        state = result.state
        events = list(result.events)
        round_trips = []
        if result.request is not None and transport is not None:
            try:
                g = transport.resolve(result.request.qr_id, session)
                state, ev = nav.handle_guidance(state, g, tick)
                events.extend(ev)
                round_trips.append(
                    {"qr_id": result.request.qr_id, "ok": True, "guidance": guidance_to_dict(g)}
                )
            except pg.NoRouteError:
                round_trips.append(
                    {"qr_id": result.request.qr_id, "ok": False, "error": "no_route"}
                )
            except Exception as exc:  # unreachable server: degraded mode
                state = nav.handle_resolve_failure(state)
                round_trips.append(
                    {"qr_id": result.request.qr_id, "ok": False, "error": type(exc).__name__}
                )

        haptic = result.haptic
        vib = config.haptics_enabled and nav.vibration_sample(haptic, t)

        dist_to_dest = math.dist(pose.position, dest_pos)
        records.append(
            {
                "type": "tick",
                "tick": tick,
                "t": round(t, 4),
                "pose": {
                    "x": pose.position[0],
                    "y": pose.position[1],
                    "heading": pose.body_heading,
                    "sweep": pose.phone_yaw_offset,
                },
                "touch": list(touch) if touch else None,
                "vibration": bool(vib),
                "haptic_active": bool(haptic.active),
                "detection": (
                    [c.name for c in result.detection.ordered_pair]
                    if result.detection
                    else None
                ),
                "assigned_edge": state.assigned.edge if state.assigned else None,
                "mode": state.mode.value,
                "events": [
                    {"kind": e.kind, "tick": e.tick, "data": e.data} for e in events
                ],
                "round_trips": round_trips,
                "dist_to_dest": round(dist_to_dest, 4),
            }
        )

        if state.mode is nav.Mode.ARRIVED or dist_to_dest <= config.arrival_radius:
            reached = True
            time_to_goal = t
            break

        agent = agent_step(agent, vib, config.agent, tick)

    if trace_path is not None:
        write_trace(trace_path, records)
    return records, eval_trace(records)


# ---------------------------------------------------------------------------
# trace IO and metrics


def write_trace(path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, separators=(",", ":"), sort_keys=True))
            fh.write("\n")


def read_trace(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(i, str(exc)) from None
            if "type" not in rec:
                raise TraceParseError(i, "missing record type")
            records.append(rec)
    return records


def eval_trace(records: list[dict]) -> RunMetrics:
    """Recompute run metrics from a trace alone."""
    if not records or records[0].get("type") != "header":
        raise TraceParseError(1, "first record must be the header")
    header = records[0]
    d = pg.deployment_from_dict(header["deployment"])
    dest = tuple(header["dest_position"])
    radius = header["arrival_radius"]
    edges = {e.id: e for e in d.edges}

    ticks = [r for r in records[1:] if r.get("type") == "tick"]
    for i, r in enumerate(ticks):
        if r["tick"] != i:
            raise TraceParseError(i + 2, f"non-contiguous tick index {r['tick']}")

    if not ticks:
        return RunMetrics(False, math.inf, 0.0, 0.0, 0.0, 0, 0)

    vib_ticks = sum(1 for r in ticks if r["vibration"])
    errors = []
    marker_scans = 0
    reroutes = 0
    prev_assigned: int | None = None
    reached = False
    time_to_goal = math.inf
    for r in ticks:
        if r["assigned_edge"] is not None:
            e = edges[r["assigned_edge"]]
            errors.append(pg.cross_track_distance((r["pose"]["x"], r["pose"]["y"]), e))
        for ev in r["events"]:
            if ev["kind"] == "marker_seen":
                marker_scans += 1
            if ev["kind"] == "guidance_received":
                new_edge = ev["data"].get("edge")
                if (
                    new_edge is not None
                    and prev_assigned is not None
                    and new_edge != prev_assigned
                ):
                    reroutes += 1
                if new_edge is not None:
                    prev_assigned = new_edge
        pos = (r["pose"]["x"], r["pose"]["y"])
        arrived_now = r["mode"] == "arrived" or math.dist(pos, dest) <= radius
        if not reached and arrived_now:
            reached = True
            time_to_goal = r["t"]

    return RunMetrics(
        reached=reached,
        time_to_goal=time_to_goal,
        mean_cross_track=sum(errors) / len(errors) if errors else 0.0,
        max_cross_track=max(errors) if errors else 0.0,
        vibration_duty=vib_ticks / len(ticks),
        marker_scans=marker_scans,
        reroutes=reroutes,
    )
