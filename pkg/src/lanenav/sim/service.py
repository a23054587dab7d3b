"""Interactive simulation channel for the browser walkthrough.

One persistent connection drives one walker.  Inbound messages:
  {"type": "input", "turn": -1|0|1, "step": bool,
   "touch": {"u": int, "v": int} | null, "sweep_override": radians | null}
  {"type": "set_destination", "node": int}
  {"type": "admin_patch", "ops": [...]}
  {"type": "get_frame"}            -> latest camera frame as PNG
  {"type": "get_map"}              -> current deployment snapshot
Outbound: per-tick {"type": "tick", ...}; on demand {"type": "frame", ...}
and {"type": "map", ...}; {"type": "error", ...} for rejected requests.
"""

from __future__ import annotations

import asyncio
import base64
import math
from dataclasses import dataclass, replace

from fastapi import WebSocket, WebSocketDisconnect

from .. import navigator as nav
from .. import pathgraph as pg
from .. import scene as sc
from ..protocol import guidance_to_dict
from ..server.core import (
    NotFoundError,
    PatchRejectedError,
    PathServer,
    patch_from_dict,
)
from ..vision import VisionParams
from .agent import AgentParams, sweep_angle

TURN_RATE = math.radians(90.0)  # rad/s at turn = +/-1


@dataclass
class PendingInput:
    turn: int = 0
    step: bool = False
    touch: tuple[int, int] | None = None
    sweep_override: float | None = None


class InteractiveSim:
    """Tick-stepped walker driven by client inputs instead of the scripted
    agent.  Synchronous and deterministic; the transport layer decides the
    pacing."""

    def __init__(
        self,
        server: PathServer,
        camera: sc.CameraIntrinsics = sc.CameraIntrinsics(),
        agent: AgentParams = AgentParams(),
        vision: VisionParams = VisionParams(),
    ):
        self.server = server
        self.camera = camera
        self.agent = agent
        self.vision = vision
        self._raster_version: int | None = None
        self._raster: sc.FloorRaster | None = None
        d = server.get_deployment()
        start = d.nodes[0]
        self.pose = sc.Pose(position=start.position, body_heading=0.0)
        self.state = nav.NavState()
        self.session: int | None = None
        self.tick_no = 0
        self.pending = PendingInput()
        self.last_guidance: dict | None = None
        self._last_frame: sc.Frame | None = None

    # -- message handling ----------------------------------------------------

    def handle_message(self, msg: dict) -> list[dict]:
        kind = msg.get("type")
        if kind == "input":
            touch = msg.get("touch")
            self.pending = PendingInput(
                turn=int(msg.get("turn", 0) or 0),
                step=bool(msg.get("step", False)),
                touch=(int(touch["u"]), int(touch["v"])) if touch else None,
                sweep_override=(
                    float(msg["sweep_override"])
                    if msg.get("sweep_override") is not None
                    else None
                ),
            )
            return []
        if kind == "set_destination":
            try:
                self.session = self.server.create_session(int(msg["node"]))
            except NotFoundError as exc:
                return [{"type": "error", "error": str(exc)}]
            self.state = nav.NavState(session=self.session)
            self.last_guidance = None
            return [{"type": "tick_ack", "destination": int(msg["node"])}]
        if kind == "admin_patch":
            try:
                version = self.server.apply_patch(
                    patch_from_dict({"ops": msg.get("ops", [])})
                )
            except (NotFoundError, PatchRejectedError, ValueError) as exc:
                return [{"type": "error", "error": str(exc)}]
            return [{"type": "patch_ack", "version": version}, self.map_message()]
        if kind == "get_frame":
            return [self.frame_message()]
        if kind == "get_map":
            return [self.map_message()]
        return [{"type": "error", "error": f"unknown message type {kind!r}"}]

    # -- simulation ------------------------------------------------------------

    def _raster_for(self, d: pg.Deployment) -> sc.FloorRaster:
        if self._raster is None or self._raster_version != d.version:
            self._raster = sc.rasterize_floor(d)
            self._raster_version = d.version
        return self._raster

    def tick(self) -> dict:
        dt = 1.0 / self.agent.tick_rate
        t = self.tick_no * dt
        inp = self.pending
        self.pending = PendingInput(touch=inp.touch, sweep_override=inp.sweep_override)

        heading = self.pose.body_heading + inp.turn * TURN_RATE * dt
        x, y = self.pose.position
        if inp.step:
            x += self.agent.walking_speed * dt * math.cos(heading)
            y += self.agent.walking_speed * dt * math.sin(heading)
        sweep = (
            inp.sweep_override
            if inp.sweep_override is not None
            else sweep_angle(self.agent, t)
        )
        sweep = max(-1.22, min(1.22, sweep))
        self.pose = replace(
            self.pose, position=(x, y), body_heading=heading, phone_yaw_offset=sweep
        )

        d = self.server.get_deployment()
        frame = sc.render_frame(self._raster_for(d), self.pose, self.camera)
        self._last_frame = frame
        result = nav.step(
            self.state, frame, inp.touch, self.tick_no, t, self.vision
        )
        self.state = result.state
        events = list(result.events)
        if result.request is not None and self.session is not None:
            try:
                g = self.server.resolve_qr(result.request.qr_id, self.session)
                self.state, ev = nav.handle_guidance(self.state, g, self.tick_no)
                events.extend(ev)
                self.last_guidance = guidance_to_dict(g)
            except (NotFoundError, pg.NoRouteError):
                pass
        vibration = nav.vibration_sample(result.haptic, t)

        msg = {
            "type": "tick",
            "t": round(t, 4),
            "frame_id": self.tick_no,
            "pose": {
                "x": self.pose.position[0],
                "y": self.pose.position[1],
                "heading": self.pose.body_heading,
                "sweep": self.pose.phone_yaw_offset,
            },
            "vibration": bool(vibration),
            "mode": self.state.mode.value,
            "events": [{"kind": e.kind, "tick": e.tick, "data": e.data} for e in events],
            "guidance": self.last_guidance,
        }
        self.tick_no += 1
        return msg

    # -- on-demand payloads ----------------------------------------------------

    def frame_message(self) -> dict:
        if self._last_frame is None:
            d = self.server.get_deployment()
            self._last_frame = sc.render_frame(
                self._raster_for(d), self.pose, self.camera
            )
        png = sc.frame_to_png_bytes(self._last_frame.pixels)
        return {
            "type": "frame",
            "frame_id": max(self.tick_no - 1, 0),
            "png_base64": base64.b64encode(png).decode("ascii"),
        }

    def map_message(self) -> dict:
        return {
            "type": "map",
            "deployment": pg.deployment_to_dict(self.server.get_deployment()),
        }


def attach_sim_channel(app, server: PathServer, tick_interval: float | None = None):
    """Mount the websocket endpoint at /ws on a FastAPI app."""
    interval = tick_interval if tick_interval is not None else 1.0 / AgentParams().tick_rate

    @app.websocket("/ws")
    async def ws_channel(ws: WebSocket):
        await ws.accept()
        sim = InteractiveSim(server)
        await ws.send_json(sim.map_message())
        try:
            while True:
                # drain any queued client messages without blocking the tick
                while True:
                    try:
                        msg = await asyncio.wait_for(ws.receive_json(), timeout=0.0005)
                    except asyncio.TimeoutError:
                        break
                    for reply in sim.handle_message(msg):
                        await ws.send_json(reply)
                await ws.send_json(sim.tick())
                await asyncio.sleep(interval)
        except WebSocketDisconnect:
            return

    return app
