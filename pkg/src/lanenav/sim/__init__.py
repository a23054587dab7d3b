from .agent import (
    AgentParams,
    AgentState,
    TouchMode,
    agent_step,
    sweep_angle,
    touch_point,
    triangle_wave,
)
from .demo import demo_scenario, make_demo_deployment, make_straight_world
from .run import (
    RunMetrics,
    SimConfig,
    TraceParseError,
    eval_trace,
    read_trace,
    run_sim,
    write_trace,
)

__all__ = [
    "AgentParams",
    "AgentState",
    "TouchMode",
    "agent_step",
    "sweep_angle",
    "triangle_wave",
    "touch_point",
    "demo_scenario",
    "make_demo_deployment",
    "make_straight_world",
    "RunMetrics",
    "TraceParseError",
    "read_trace",
    "write_trace",
    "SimConfig",
    "eval_trace",
    "run_sim",
]
