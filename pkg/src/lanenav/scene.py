"""Synthetic world: deployment generation, floor rasterization, camera frames.

The floor is a flat RGB raster (strips + tags on gray); the phone camera is a
pinhole looking down in front of the walker, so frames are nearest-neighbor
samples of the raster through a ground-plane projection.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import pathgraph as pg
from .markers import MarkerKind, MarkerPayload, encode_marker, is_encodable

BACKGROUND_RGB = (128, 128, 128)
HORIZON_RGB = (40, 40, 40)

DEFAULT_STRIP_WIDTH = 0.05  # meters per strip
DEFAULT_STRIP_GAP = 0.05  # meters between the strips
DEFAULT_MARKER_SIZE = 0.20


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int = 320
    height: int = 240
    hfov: float = 1.0472  # 60 degrees

    def __post_init__(self) -> None:
        if self.width < 64 or self.height < 64:
            raise ValueError("frame dimensions must be >= 64")
        if not 0 < self.hfov < math.pi:
            raise ValueError("hfov out of range")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(self.hfov / 2.0)


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float]
    body_heading: float
    phone_yaw_offset: float = 0.0
    camera_height: float = 1.3
    camera_pitch: float = 1.0472  # 60 degrees below horizontal

    def __post_init__(self) -> None:
        if not 0 < self.camera_pitch < math.pi / 2:
            raise ValueError("camera_pitch out of range")
        if abs(self.phone_yaw_offset) > 1.22 + 1e-9:
            raise ValueError("phone_yaw_offset beyond 70 degrees")

    @property
    def camera_yaw(self) -> float:
        return self.body_heading + self.phone_yaw_offset


@dataclass(frozen=True)
class Frame:
    pixels: np.ndarray  # (height, width, 3) uint8

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class FloorRaster:
    grid: np.ndarray  # (H, W, 3) uint8, row 0 at ymin
    resolution: int  # cells per meter
    origin: tuple[float, float]  # world coords of cell (0, 0) corner

    def sample(self, p: tuple[float, float]) -> tuple[int, int, int] | None:
        """Nearest-neighbor lookup; None when outside the raster."""
        ix = int(math.floor((p[0] - self.origin[0]) * self.resolution))
        iy = int(math.floor((p[1] - self.origin[1]) * self.resolution))
        h, w = self.grid.shape[:2]
        if 0 <= ix < w and 0 <= iy < h:
            return tuple(int(v) for v in self.grid[iy, ix])
        return None


@dataclass(frozen=True)
class WorldParams:
    seed: int = 0
    node_count: tuple[int, int] = (4, 8)
    floor_size: tuple[float, float] = (12.0, 10.0)
    strip_width: float = DEFAULT_STRIP_WIDTH
    strip_gap: float = DEFAULT_STRIP_GAP
    marker_size: float = DEFAULT_MARKER_SIZE
    extra_edge_prob: float = 0.3

    def __post_init__(self) -> None:
        if self.strip_width <= 0 or self.strip_gap <= 0 or self.marker_size <= 0:
            raise ValueError("strip/marker dimensions must be positive")
        lo, hi = self.node_count
        if not 2 <= lo <= hi:
            raise ValueError("node_count range invalid")


class WorldGenerationError(Exception):
    """Params infeasible (too many nodes for the floor, etc.)."""


# ---------------------------------------------------------------------------
# world generation

_GRID_SPACING = 2.0
_GRID_MARGIN = 1.0
_JITTER = 0.3


def generate_world(params: WorldParams) -> pg.Deployment:
    """Deterministic valid deployment from a seed.

    Nodes sit on a jittered grid; corridors connect 4-adjacent grid cells,
    which keeps non-incident lanes apart by construction.
    """
    last_report = None
    for attempt in range(20):
        rng = random.Random(params.seed * 1_000_003 + attempt)
        d = _generate_once(params, rng)
        if d is None:
            continue
        report = pg.validate_deployment(d)
        if not report:
            return d
        last_report = report
    raise WorldGenerationError(
        f"could not generate a valid world for {params} (last report: {last_report})"
    )


def _generate_once(params: WorldParams, rng: random.Random) -> pg.Deployment | None:
    w, h = params.floor_size
    cols = int((w - 2 * _GRID_MARGIN) // _GRID_SPACING) + 1
    rows = int((h - 2 * _GRID_MARGIN) // _GRID_SPACING) + 1
    target = rng.randint(*params.node_count)
    if target > cols * rows:
        raise WorldGenerationError(
            f"{target} nodes do not fit a {cols}x{rows} grid on this floor"
        )

    # grow a connected set of grid cells
    start = (rng.randrange(rows), rng.randrange(cols))
    chosen = [start]
    chosen_set = {start}
    frontier = set()
    tree_parent: dict[tuple[int, int], tuple[int, int]] = {}

    def neighbors(cell):
        r, c = cell
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if 0 <= r + dr < rows and 0 <= c + dc < cols:
                yield (r + dr, c + dc)

    for n in neighbors(start):
        frontier.add((start, n))
    while len(chosen) < target and frontier:
        src, cell = sorted(frontier)[rng.randrange(len(frontier))]
        frontier = {(s, c) for s, c in frontier if c != cell}
        chosen.append(cell)
        chosen_set.add(cell)
        tree_parent[cell] = src
        for n in neighbors(cell):
            if n not in chosen_set:
                frontier.add((cell, n))
    if len(chosen) < target:
        return None

    node_ids = {cell: i for i, cell in enumerate(chosen)}
    positions = {}
    for cell in chosen:
        r, c = cell
        x = _GRID_MARGIN + c * _GRID_SPACING + rng.uniform(-_JITTER, _JITTER)
        y = _GRID_MARGIN + r * _GRID_SPACING + rng.uniform(-_JITTER, _JITTER)
        positions[cell] = (round(x, 3), round(y, 3))

    edge_cells: list[tuple[tuple[int, int], tuple[int, int]]] = [
        (tree_parent[cell], cell) for cell in chosen if cell in tree_parent
    ]
    present = {frozenset(e) for e in edge_cells}
    for cell in chosen:
        for n in neighbors(cell):
            if n in chosen_set and frozenset((cell, n)) not in present:
                if rng.random() < params.extra_edge_prob:
                    edge_cells.append((cell, n))
                    present.add(frozenset((cell, n)))

    edges: list[pg.Edge] = []
    incident: dict[int, list[pg.Edge]] = {i: [] for i in node_ids.values()}
    ordered_pairs = [
        (a, b) for a in pg.PALETTE for b in pg.PALETTE if a is not b
    ]
    for eid, (ca, cb) in enumerate(edge_cells):
        na, nb = node_ids[ca], node_ids[cb]
        pool = ordered_pairs[:]
        rng.shuffle(pool)
        pair = None
        for cand in pool:
            probe = pg.Edge(eid, na, nb, (positions[ca], positions[cb]), cand)
            taken_a = {pg.leaving_pair(e, na) for e in incident[na]}
            taken_b = {pg.leaving_pair(e, nb) for e in incident[nb]}
            if (
                pg.leaving_pair(probe, na) not in taken_a
                and pg.leaving_pair(probe, nb) not in taken_b
            ):
                pair = cand
                break
        if pair is None:
            return None
        edge = pg.Edge(eid, na, nb, (positions[ca], positions[cb]), pair)
        edges.append(edge)
        incident[na].append(edge)
        incident[nb].append(edge)

    degree = {i: len(incident[i]) for i in node_ids.values()}
    nodes = []
    poi_seen = False
    for cell in chosen:
        nid = node_ids[cell]
        kind = pg.NodeKind.POI if degree[nid] == 1 else pg.NodeKind.INTERSECTION
        poi_seen = poi_seen or kind is pg.NodeKind.POI
        nodes.append(pg.Node(nid, positions[cell], kind))
    if not poi_seen:
        n = nodes[-1]
        nodes[-1] = pg.Node(n.id, n.position, pg.NodeKind.POI, n.label)

    anchors = []
    next_qr = 0
    for node in nodes:
        while not is_encodable(MarkerPayload(MarkerKind.NODE, next_qr)):
            next_qr += 1
        anchors.append(
            pg.QrAnchor(next_qr, node.id, node.position, params.marker_size)
        )
        next_qr += 1

    return pg.Deployment(
        deployment_id=rng.randrange(1 << 16),
        version=1,
        nodes=tuple(nodes),
        edges=tuple(edges),
        anchors=tuple(anchors),
        floor_bounds=(0.0, 0.0, w, h),
    )


# ---------------------------------------------------------------------------
# floor rasterization


def rasterize_floor(
    d: pg.Deployment,
    resolution: int = 100,
    strip_width: float = DEFAULT_STRIP_WIDTH,
    strip_gap: float = DEFAULT_STRIP_GAP,
    edge_marker_interval: float | None = None,
) -> FloorRaster:
    """Paint strips and markers onto a gray floor grid.

    Walking an edge Forward, color1 is the left strip.  Anchor tags are drawn
    over the strips; optional edge tags sit 0.3 m left of the lane every
    `edge_marker_interval` meters of arc length.
    """
    xmin, ymin, xmax, ymax = d.floor_bounds
    W = math.ceil((xmax - xmin) * resolution)
    H = math.ceil((ymax - ymin) * resolution)
    grid = np.empty((H, W, 3), dtype=np.uint8)
    grid[:] = BACKGROUND_RGB

    cell = 1.0 / resolution
    # cell-center coordinates, lazily by bounding box
    half_lane = strip_gap / 2.0 + strip_width

    for e in d.edges:
        c_left = np.array(e.color_pair[0].rgb, dtype=np.uint8)
        c_right = np.array(e.color_pair[1].rgb, dtype=np.uint8)
        for i in range(len(e.polyline) - 1):
            ax, ay = e.polyline[i]
            bx, by = e.polyline[i + 1]
            seg_len = math.hypot(bx - ax, by - ay)
            if seg_len == 0:
                continue
            dx, dy = (bx - ax) / seg_len, (by - ay) / seg_len
            pad = half_lane + cell
            x0 = max(min(ax, bx) - pad, xmin)
            x1 = min(max(ax, bx) + pad, xmax)
            y0 = max(min(ay, by) - pad, ymin)
            y1 = min(max(ay, by) + pad, ymax)
            j0 = int((x0 - xmin) * resolution)
            j1 = min(int((x1 - xmin) * resolution) + 1, W)
            i0 = int((y0 - ymin) * resolution)
            i1 = min(int((y1 - ymin) * resolution) + 1, H)
            if j0 >= j1 or i0 >= i1:
                continue
            xs = xmin + (np.arange(j0, j1) + 0.5) * cell
            ys = ymin + (np.arange(i0, i1) + 0.5) * cell
            gx, gy = np.meshgrid(xs, ys)
            rx, ry = gx - ax, gy - ay
            t = rx * dx + ry * dy
            s = dx * ry - dy * rx  # positive = left of travel direction
            on_seg = (t >= 0) & (t <= seg_len)
            left = on_seg & (s >= strip_gap / 2) & (s <= half_lane)
            right = on_seg & (s <= -strip_gap / 2) & (s >= -half_lane)
            sub = grid[i0:i1, j0:j1]
            sub[left] = c_left
            sub[right] = c_right

    def draw_tag(tag: np.ndarray, center: tuple[float, float], size: float) -> None:
        n = tag.shape[0]
        x0 = center[0] - size / 2
        y0 = center[1] - size / 2
        j0 = int(round((x0 - xmin) * resolution))
        i0 = int(round((y0 - ymin) * resolution))
        side = int(round(size * resolution))
        for ii in range(side):
            gy = i0 + ii
            if not 0 <= gy < H:
                continue
            # tag row 0 is the top of the tag = largest y
            gr = n - 1 - min(int(ii * n / side), n - 1)
            for jj in range(side):
                gxx = j0 + jj
                if not 0 <= gxx < W:
                    continue
                gc = min(int(jj * n / side), n - 1)
                grid[gy, gxx] = (0, 0, 0) if tag[gr, gc] else (255, 255, 255)

    for a in d.anchors:
        tag = encode_marker(MarkerPayload(MarkerKind.NODE, a.qr_id))
        draw_tag(tag, a.position, a.size)

    if edge_marker_interval:
        for e in d.edges:
            _draw_edge_tags(d, e, edge_marker_interval, draw_tag)

    return FloorRaster(grid=grid, resolution=resolution, origin=(xmin, ymin))


def _draw_edge_tags(d, e, interval, draw_tag) -> None:
    total = e.length()
    dist = interval
    while dist < total - 0.5:
        p, left = _point_along(e.polyline, dist)
        aux = min(int(round(dist * 10)), 255)
        payload = MarkerPayload(MarkerKind.EDGE, e.id, aux)
        # nudge around unusable aux values (rotation-ambiguous dictionary gaps)
        for delta in (0, 1, -1, 2, -2):
            cand = MarkerPayload(MarkerKind.EDGE, e.id, max(0, min(255, aux + delta)))
            if is_encodable(cand):
                payload = cand
                break
        else:
            dist += interval
            continue
        center = (p[0] + 0.3 * left[0], p[1] + 0.3 * left[1])
        draw_tag(encode_marker(payload), center, DEFAULT_MARKER_SIZE)
        dist += interval


def _point_along(polyline, dist):
    remaining = dist
    for i in range(len(polyline) - 1):
        a, b = polyline[i], polyline[i + 1]
        seg = math.dist(a, b)
        if remaining <= seg:
            f = remaining / seg
            dx, dy = (b[0] - a[0]) / seg, (b[1] - a[1]) / seg
            return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])), (-dy, dx)
        remaining -= seg
    a, b = polyline[-2], polyline[-1]
    seg = math.dist(a, b)
    dx, dy = (b[0] - a[0]) / seg, (b[1] - a[1]) / seg
    return polyline[-1], (-dy, dx)


# ---------------------------------------------------------------------------
# camera model


def _camera_basis(pose: Pose):
    yaw, pitch = pose.camera_yaw, pose.camera_pitch
    forward = np.array(
        [math.cos(yaw) * math.cos(pitch), math.sin(yaw) * math.cos(pitch), -math.sin(pitch)]
    )
    right = np.array([math.sin(yaw), -math.cos(yaw), 0.0])
    up = np.array(
        [math.cos(yaw) * math.sin(pitch), math.sin(yaw) * math.sin(pitch), math.cos(pitch)]
    )
    return forward, right, up


class AboveHorizon:
    """Sentinel: the pixel ray never meets the ground ahead of the camera."""


ABOVE_HORIZON = AboveHorizon()


def project_ground(
    pose: Pose, k: CameraIntrinsics, pixel: tuple[float, float]
) -> tuple[float, float] | AboveHorizon:
    """Ground-plane point seen by a pixel, or ABOVE_HORIZON."""
    u, v = pixel
    f = k.focal_px
    xn = (u + 0.5 - k.width / 2.0) / f
    yn = (v + 0.5 - k.height / 2.0) / f
    forward, right, up = _camera_basis(pose)
    ray = forward + xn * right - yn * up
    if ray[2] >= -1e-12:
        return ABOVE_HORIZON
    t = pose.camera_height / -ray[2]
    return (pose.position[0] + t * ray[0], pose.position[1] + t * ray[1])


def render_frame(
    raster: FloorRaster,
    pose: Pose,
    k: CameraIntrinsics = CameraIntrinsics(),
    noise_sigma: float = 0.0,
    noise_seed: int = 0,
) -> Frame:
    """Nearest-neighbor resampling of the floor through the pinhole model."""
    f = k.focal_px
    xs = (np.arange(k.width) + 0.5 - k.width / 2.0) / f
    ys = (np.arange(k.height) + 0.5 - k.height / 2.0) / f
    xn, yn = np.meshgrid(xs, ys)
    forward, right, up = _camera_basis(pose)
    rx = forward[0] + xn * right[0] - yn * up[0]
    ry = forward[1] + xn * right[1] - yn * up[1]
    rz = forward[2] + xn * right[2] - yn * up[2]

    pixels = np.empty((k.height, k.width, 3), dtype=np.uint8)
    pixels[:] = HORIZON_RGB
    hits = rz < -1e-12
    t = np.where(hits, pose.camera_height / np.where(hits, -rz, 1.0), 0.0)
    gx = pose.position[0] + t * rx
    gy = pose.position[1] + t * ry
    ix = np.floor((gx - raster.origin[0]) * raster.resolution).astype(np.int64)
    iy = np.floor((gy - raster.origin[1]) * raster.resolution).astype(np.int64)
    H, W = raster.grid.shape[:2]
    valid = hits & (ix >= 0) & (ix < W) & (iy >= 0) & (iy < H)
    pixels[valid] = raster.grid[iy[valid], ix[valid]]

    if noise_sigma > 0:
        rng = np.random.default_rng(noise_seed)
        noisy = pixels.astype(np.float64) + rng.normal(0, noise_sigma, pixels.shape)
        pixels = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    return Frame(pixels=pixels)


# ---------------------------------------------------------------------------
# image export


def write_ppm(path, pixels: np.ndarray) -> None:
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(pixels.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    assert parts[0] == b"P6"
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8)[: w * h * 3].reshape(h, w, 3)


def frame_to_png_bytes(pixels: np.ndarray) -> bytes:
    from io import BytesIO

    from PIL import Image

    buf = BytesIO()
    # frames are row 0 = top already; rasters are row 0 = ymin and get flipped
    Image.fromarray(pixels).save(buf, format="PNG")
    return buf.getvalue()
