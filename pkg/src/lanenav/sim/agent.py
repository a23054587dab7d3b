"""Scripted walker: cane-style phone sweep, proprioceptive steering on
vibration onsets, and an in-place search spin when the lane is lost."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from ..scene import CameraIntrinsics, Pose


class TouchMode(Enum):
    FIXED_CENTER = "fixed_center"
    FINGER_SCAN = "finger_scan"


@dataclass(frozen=True)
class AgentParams:
    tick_rate: float = 10.0  # Hz
    walking_speed: float = 0.5  # m/s
    sweep_amplitude: float = math.radians(40.0)
    sweep_frequency: float = 1.0  # full triangle periods per second
    steering_gain: float = 0.6
    touch_mode: TouchMode = TouchMode.FIXED_CENTER
    finger_scan_rate: float = 2.0  # screen sweeps per second
    lost_spin_after_s: float = 3.0  # silence before searching by rotation
    spin_rate: float = math.radians(45.0)  # rad/s while searching

    def __post_init__(self) -> None:
        if min(
            self.tick_rate,
            self.walking_speed,
            self.sweep_amplitude,
            self.sweep_frequency,
            self.steering_gain,
            self.finger_scan_rate,
        ) <= 0:
            raise ValueError("agent parameters must be positive")
        if self.sweep_amplitude > math.radians(70.0) + 1e-9:
            raise ValueError("sweep amplitude beyond the 70 degree phone limit")


@dataclass(frozen=True)
class AgentState:
    pose: Pose
    prev_vibration: bool = False
    last_vibration_t: float = 0.0


def triangle_wave(phase: float) -> float:
    """Unit triangle wave: 0 at phase 0, +1 at 0.25, 0 at 0.5, -1 at 0.75."""
    p = phase % 1.0
    if p < 0.25:
        return 4.0 * p
    if p < 0.75:
        return 2.0 - 4.0 * p
    return 4.0 * p - 4.0


def sweep_angle(params: AgentParams, t: float) -> float:
    if params.touch_mode is TouchMode.FINGER_SCAN:
        return 0.0
    return params.sweep_amplitude * triangle_wave(t * params.sweep_frequency)


def touch_point(
    params: AgentParams, k: CameraIntrinsics, t: float
) -> tuple[int, int]:
    """Where the simulated finger rests this tick."""
    if params.touch_mode is TouchMode.FIXED_CENTER:
        return (k.width // 2, k.height // 2)
    frac = (triangle_wave(t * params.finger_scan_rate / 2.0) + 1.0) / 2.0
    u = min(int(frac * k.width), k.width - 1)
    return (u, k.height // 2)


def agent_step(
    state: AgentState, vibrating: bool, params: AgentParams, tick: int
) -> AgentState:
    """Advance the walker by one tick given the current vibration sample.

    A vibration onset at sweep angle phi steers the body by gain * phi (the
    hand position read proprioceptively).  After a configurable silent spell
    the walker stops and rotates in place until feedback returns.
    """
    dt = 1.0 / params.tick_rate
    t = tick * dt
    pose = state.pose
    heading = pose.body_heading

    if vibrating and not state.prev_vibration:
        heading += params.steering_gain * pose.phone_yaw_offset
    last_vib_t = t if vibrating else state.last_vibration_t

    searching = not vibrating and (t - last_vib_t) >= params.lost_spin_after_s
    if searching:
        heading += params.spin_rate * dt
        x, y = pose.position
    else:
        step_len = params.walking_speed * dt
        x = pose.position[0] + step_len * math.cos(heading)
        y = pose.position[1] + step_len * math.sin(heading)

    next_pose = Pose(
        position=(x, y),
        body_heading=heading,
        phone_yaw_offset=sweep_angle(params, t + dt),
        camera_height=pose.camera_height,
        camera_pitch=pose.camera_pitch,
    )
    return AgentState(
        pose=next_pose, prev_vibration=vibrating, last_vibration_t=last_vib_t
    )
