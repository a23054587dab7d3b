"""Command-line front end: thin client over the library and the HTTP service.

Exit codes: 0 success, 1 not-reached / runtime failure, 2 configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pathgraph as pg
from . import scene as sc
from .server import PathServer, create_app
from .sim import SimConfig, TraceParseError, eval_trace, read_trace, run_sim
from .sim.demo import demo_scenario


def _load_world(path: str) -> pg.Deployment:
    try:
        d = pg.loads_deployment(Path(path).read_text())
    except FileNotFoundError:
        raise click.UsageError(f"world file not found: {path}")
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise click.UsageError(f"invalid world file {path}: {exc}")
    report = pg.validate_deployment(d)
    if report:
        raise click.UsageError(
            "world fails validation: " + "; ".join(v.message for v in report)
        )
    return d


@click.group()
def main():
    """Strip-lane navigation toolkit: world generation, closed-loop
    simulation, rendering, trace evaluation, and the path service."""


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def gen(seed: int, out_path: str):
    """Generate a random valid deployment and write it as JSON."""
    try:
        d = sc.generate_world(sc.WorldParams(seed=seed))
    except sc.WorldGenerationError as exc:
        click.echo(f"generation failed: {exc}", err=True)
        sys.exit(1)
    Path(out_path).write_text(pg.dumps_deployment(d))
    click.echo(f"wrote deployment {d.deployment_id} ({len(d.nodes)} nodes) to {out_path}")


@main.command()
@click.option("--world", "world_path", required=True, type=click.Path(dir_okay=False))
@click.option("--from", "from_node", required=True, type=int, help="start node id")
@click.option("--to", "to_node", required=True, type=int, help="destination node id")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False))
@click.option("--server", "server_url", default=None, help="remote path server URL")
@click.option("--in-process", is_flag=True, help="embed the path server (default)")
@click.option("--offline", is_flag=True, help="navigate from a local world copy")
@click.option("--no-haptics", is_flag=True, help="ablation: disable vibration")
@click.option("--noise-sigma", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--timeout", type=float, default=120.0, show_default=True)
@click.option("--start-offset", type=float, default=0.0, show_default=True)
@click.option(
    "--patch",
    "patches",
    multiple=True,
    metavar="T:EDGE:0|1",
    help="at sim time T set EDGE enabled (1) or disabled (0); repeatable",
)
def run(
    world_path,
    from_node,
    to_node,
    trace_path,
    server_url,
    in_process,
    offline,
    no_haptics,
    noise_sigma,
    seed,
    timeout,
    start_offset,
    patches,
):
    """Run one closed-loop walk and print the run metrics as JSON."""
    if server_url and (in_process or offline):
        raise click.UsageError("--server conflicts with --in-process/--offline")
    d = _load_world(world_path)
    known = {n.id for n in d.nodes}
    if from_node not in known or to_node not in known:
        raise click.UsageError(f"unknown node id (have {sorted(known)})")
    parsed = []
    for p in patches:
        try:
            t, edge, enabled = p.split(":")
            parsed.append((float(t), int(edge), bool(int(enabled))))
        except ValueError:
            raise click.UsageError(f"bad --patch value {p!r}, expected T:EDGE:0|1")
    cfg = SimConfig(
        deployment=d,
        start_node=from_node,
        dest_node=to_node,
        seed=seed,
        timeout_s=timeout,
        start_offset=start_offset,
        haptics_enabled=not no_haptics,
        noise_sigma=noise_sigma,
        offline=offline,
        server_url=server_url,
        patches=tuple(parsed),
    )
    try:
        records, metrics = run_sim(cfg, trace_path=trace_path)
    except pg.NoRouteError as exc:
        click.echo(f"no route: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(metrics.to_dict(), sort_keys=True))
    sys.exit(0 if metrics.reached else 1)


@main.command()
@click.option("--world", "world_path", required=True, type=click.Path(dir_okay=False))
@click.option("--pose", required=True, metavar="X,Y,HEADING[,SWEEP]")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def render(world_path, pose, out_path):
    """Render one camera frame at a pose and write it as binary PPM (P6)."""
    d = _load_world(world_path)
    try:
        parts = [float(v) for v in pose.split(",")]
        x, y, heading = parts[0], parts[1], parts[2]
        sweep = parts[3] if len(parts) > 3 else 0.0
    except (ValueError, IndexError):
        raise click.UsageError(f"bad --pose value {pose!r}, expected X,Y,HEADING[,SWEEP]")
    try:
        p = sc.Pose(position=(x, y), body_heading=heading, phone_yaw_offset=sweep)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    frame = sc.render_frame(sc.rasterize_floor(d), p)
    sc.write_ppm(out_path, frame.pixels)
    click.echo(f"wrote {frame.width}x{frame.height} frame to {out_path}")


@main.command("eval")
@click.option("--trace", "trace_path", required=True, type=click.Path(dir_okay=False))
def eval_cmd(trace_path):
    """Recompute run metrics from a trace file alone."""
    try:
        records = read_trace(trace_path)
        metrics = eval_trace(records)
    except FileNotFoundError:
        raise click.UsageError(f"trace file not found: {trace_path}")
    except TraceParseError as exc:
        raise click.UsageError(str(exc))
    click.echo(json.dumps(metrics.to_dict(), sort_keys=True))
    sys.exit(0 if metrics.reached else 1)


@main.command()
@click.option("--patch-at", type=float, default=None, help="disable the branch edge at sim time T")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None)
def demo(patch_at, trace_path, seed):
    """Run the built-in demo scenario (optionally with the live reroute)."""
    cfg = demo_scenario(patch_at=patch_at)
    if seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=seed)
    records, metrics = run_sim(cfg, trace_path=trace_path)
    click.echo(json.dumps(metrics.to_dict(), sort_keys=True))
    sys.exit(0 if metrics.reached else 1)


@main.command()
@click.option("--world", "world_path", required=True, type=click.Path(dir_okay=False))
@click.option("--listen", default="127.0.0.1:8000", show_default=True, metavar="HOST:PORT")
@click.option("--repo", "repo_path", type=click.Path(dir_okay=False), help="persist patches here")
@click.option(
    "--frontend",
    "frontend_dir",
    type=click.Path(file_okay=False),
    help="serve a built UI from this directory at /",
)
@click.option(
    "--tick-interval",
    type=float,
    default=None,
    help="seconds between walker ticks on /ws (default: 1/tick_rate)",
)
def serve(world_path, listen, repo_path, frontend_dir, tick_interval):
    """Host the path server HTTP API plus the UI simulation channel at /ws."""
    import uvicorn

    from .sim.service import attach_sim_channel

    d = _load_world(world_path)
    try:
        host, port_s = listen.rsplit(":", 1)
        port = int(port_s)
    except ValueError:
        raise click.UsageError(f"bad --listen value {listen!r}, expected HOST:PORT")
    server = PathServer(d, repo_path=repo_path)
    app = create_app(server)
    attach_sim_channel(app, server, tick_interval=tick_interval)
    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
