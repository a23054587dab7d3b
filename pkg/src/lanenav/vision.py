"""Sensing half of the visual-to-haptic transducer.

Turns a camera frame into palette labels, then into a lane detection (ordered
color pair + axis + screen mask) and decoded floor tags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .markers import GRID_SIZE, MarkerPayload, decode_grid
from .pathgraph import PALETTE, ColorId
from .scene import Frame

LABEL_BACKGROUND = 0
# palette colors occupy labels 1..6 in palette order
LABEL_MARKER_BLACK = 7
LABEL_MARKER_WHITE = 8

_REF_COLORS = np.array(
    [c.rgb for c in PALETTE] + [(0, 0, 0), (255, 255, 255)], dtype=np.float32
)

_CONN8 = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class VisionParams:
    color_threshold: float = 60.0  # Euclidean RGB distance
    min_blob_area: int = 80  # pixels
    max_pairing_angle: float = math.radians(10.0)
    gap_range_px: tuple[float, float] = (4.0, 60.0)  # centroid gap, perpendicular
    dilation_radius: int = 12  # lane_mask growth for touch tests
    expected_pair_area: float = 2400.0  # combined strip pixels when well-placed
    min_marker_area: float = 400.0  # convex hull area of a tag candidate

    def __post_init__(self) -> None:
        if min(
            self.color_threshold,
            self.min_blob_area,
            self.max_pairing_angle,
            self.gap_range_px[0],
            self.dilation_radius,
            self.expected_pair_area,
            self.min_marker_area,
        ) <= 0:
            raise ValueError("vision parameters must be positive")


@dataclass(frozen=True)
class LaneDetection:
    ordered_pair: tuple[ColorId, ColorId]  # left-to-right on screen
    axis_angle: float  # radians from image-up, positive clockwise, (-pi/2, pi/2]
    lane_mask: np.ndarray  # bool (h, w): strips plus the corridor between them
    confidence: float


def label_code(color: ColorId) -> int:
    return PALETTE.index(color) + 1


_REF_NORM2 = (_REF_COLORS**2).sum(axis=1)


def segment_colors(f: Frame, p: VisionParams = VisionParams()) -> np.ndarray:
    """Per-pixel nearest reference color within threshold, else background."""
    h, w = f.pixels.shape[:2]
    px = f.pixels.reshape(-1, 3).astype(np.float32)
    # argmin over squared distance via |p|^2 - 2 p.c + |c|^2; ties resolve to
    # the first (palette-order) reference
    scores = _REF_NORM2[None, :] - 2.0 * (px @ _REF_COLORS.T)
    best = np.argmin(scores, axis=1)
    d2 = (px * px).sum(axis=1) + scores[np.arange(len(px)), best]
    ok = d2 <= p.color_threshold**2
    return np.where(ok, best + 1, LABEL_BACKGROUND).astype(np.uint8).reshape(h, w)


@dataclass(frozen=True)
class _StripCandidate:
    color: ColorId
    area: int
    centroid: tuple[float, float]  # (u, v)
    axis: tuple[float, float]  # unit (du, dv), dv <= 0 (pointing image-up)
    pixels: np.ndarray  # (n, 2) int array of (v, u)

    @property
    def angle(self) -> float:
        du, dv = self.axis
        return math.atan2(du, -dv)


def _strip_candidates(mask: np.ndarray, p: VisionParams) -> list[_StripCandidate]:
    out: list[_StripCandidate] = []
    for idx, color in enumerate(PALETTE):
        binary = mask == idx + 1
        labeled, n = ndimage.label(binary, structure=_CONN8)
        if n == 0:
            continue
        areas = ndimage.sum_labels(binary, labeled, index=range(1, n + 1))
        slices = ndimage.find_objects(labeled)
        for comp in range(1, n + 1):
            area = int(areas[comp - 1])
            if area < p.min_blob_area:
                continue
            sl = slices[comp - 1]
            lvs, lus = np.nonzero(labeled[sl] == comp)
            vs = lvs + sl[0].start
            us = lus + sl[1].start
            cu, cv = float(us.mean()), float(vs.mean())
            pts = np.stack([us - cu, vs - cv], axis=1)
            cov = pts.T @ pts / len(pts)
            evals, evecs = np.linalg.eigh(cov)
            du, dv = evecs[:, np.argmax(evals)]
            if dv > 0 or (dv == 0 and du < 0):
                du, dv = -du, -dv
            out.append(
                _StripCandidate(
                    color=color,
                    area=area,
                    centroid=(cu, cv),
                    axis=(float(du), float(dv)),
                    pixels=np.stack([vs, us], axis=1),
                )
            )
    return out


def _angle_diff(a: float, b: float) -> float:
    d = abs(a - b)
    return min(d, math.pi - d)


def _row_extremes(pts_vu: np.ndarray) -> np.ndarray:
    """Reduce an (n, 2) array of (v, u) pixels to the per-row leftmost and
    rightmost points, as (m, 2) float (u, v). The convex hull of these
    extremes equals the hull of the full pixel set."""
    vs = pts_vu[:, 0]
    us = pts_vu[:, 1]
    v0, v1 = int(vs.min()), int(vs.max())
    rows = vs - v0
    nrows = v1 - v0 + 1
    umin = np.full(nrows, np.iinfo(np.int64).max, dtype=np.int64)
    umax = np.full(nrows, np.iinfo(np.int64).min, dtype=np.int64)
    np.minimum.at(umin, rows, us)
    np.maximum.at(umax, rows, us)
    present = umax >= umin
    vcoords = np.arange(v0, v1 + 1)[present]
    out = np.concatenate(
        [
            np.stack([umin[present], vcoords], axis=1),
            np.stack([umax[present], vcoords], axis=1),
        ]
    )
    return out.astype(float)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain on (x, y) float points; returns CCW hull."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list[np.ndarray] = []
    for pt in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def _fill_convex(hull: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Scanline fill of a convex polygon given as (u, v) vertices."""
    out = np.zeros(shape, dtype=bool)
    if len(hull) == 0:
        return out
    v0 = max(int(math.floor(hull[:, 1].min())), 0)
    v1 = min(int(math.ceil(hull[:, 1].max())), shape[0] - 1)
    if v1 < v0:
        return out

    rows = np.arange(v0, v1 + 1, dtype=float)[:, None]  # (R, 1)
    ua, va = hull[:, 0][None, :], hull[:, 1][None, :]  # (1, E)
    ub = np.roll(hull[:, 0], -1)[None, :]
    vb = np.roll(hull[:, 1], -1)[None, :]
    sloped = va != vb
    with np.errstate(divide="ignore", invalid="ignore"):
        x = ua + (rows - va) * (ub - ua) / (vb - va)
    hit = sloped & (np.minimum(va, vb) <= rows) & (rows <= np.maximum(va, vb))
    horiz = ~sloped & (np.abs(rows - va) < 0.5)
    lo_cand = np.where(hit, x, np.inf)
    hi_cand = np.where(hit, x, -np.inf)
    lo_cand = np.minimum(lo_cand, np.where(horiz, np.minimum(ua, ub), np.inf))
    hi_cand = np.maximum(hi_cand, np.where(horiz, np.maximum(ua, ub), -np.inf))
    row_lo = lo_cand.min(axis=1)
    row_hi = hi_cand.max(axis=1)
    valid = np.isfinite(row_lo)

    row_lo = np.where(valid, row_lo, 0.0)
    row_hi = np.where(valid, row_hi, -1.0)
    u0 = np.maximum(np.ceil(row_lo - 0.25), 0).astype(int)
    u1 = np.minimum(np.floor(row_hi + 0.25), shape[1] - 1).astype(int)
    cols = np.arange(shape[1])[None, :]
    band = valid[:, None] & (cols >= u0[:, None]) & (cols <= u1[:, None])
    out[v0 : v1 + 1, :] = band
    return out


def detect_lane(mask: np.ndarray, p: VisionParams = VisionParams()) -> LaneDetection | None:
    """Find the dominant two-strip lane in a label mask, or None."""
    cands = _strip_candidates(mask, p)
    best: tuple[float, _StripCandidate, _StripCandidate] | None = None
    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            a, b = cands[i], cands[j]
            if a.color is b.color:
                continue
            if _angle_diff(a.angle, b.angle) > p.max_pairing_angle:
                continue
            axis = np.array(a.axis) + np.array(b.axis)
            norm = np.linalg.norm(axis)
            if norm == 0:
                continue
            axis /= norm
            delta = (
                b.centroid[0] - a.centroid[0],
                b.centroid[1] - a.centroid[1],
            )
            gap = abs(axis[0] * delta[1] - axis[1] * delta[0])
            if not p.gap_range_px[0] <= gap <= p.gap_range_px[1]:
                continue
            combined = a.area + b.area
            if best is None or combined > best[0]:
                best = (combined, a, b)
    if best is None:
        return None

    combined, a, b = best
    axis = np.array(a.axis) + np.array(b.axis)
    axis /= np.linalg.norm(axis)
    du, dv = float(axis[0]), float(axis[1])
    if dv > 0 or (dv == 0 and du < 0):
        du, dv = -du, -dv
    angle = math.atan2(du, -dv)

    # left/right judged perpendicular to the axis oriented image-up (away
    # from the walker): left = axis rotated so that straight-up lanes put
    # smaller u on the left
    left_vec = (dv, -du)
    proj_a = a.centroid[0] * left_vec[0] + a.centroid[1] * left_vec[1]
    proj_b = b.centroid[0] * left_vec[0] + b.centroid[1] * left_vec[1]
    left, right = (a, b) if proj_a >= proj_b else (b, a)

    both = np.concatenate([a.pixels, b.pixels], axis=0)
    hull = _convex_hull(_row_extremes(both))  # to (u, v)
    lane_mask = _fill_convex(hull, mask.shape)
    lane_mask[both[:, 0], both[:, 1]] = True

    return LaneDetection(
        ordered_pair=(left.color, right.color),
        axis_angle=angle,
        lane_mask=lane_mask,
        confidence=min(1.0, combined / p.expected_pair_area),
    )


def dilate_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grow a boolean mask by a Euclidean radius."""
    if not mask.any():
        return mask.copy()
    dist = ndimage.distance_transform_edt(~mask)
    return dist <= radius


# ---------------------------------------------------------------------------
# tag detection


def _quad_corners(pts_vu: np.ndarray) -> np.ndarray | None:
    """Four corner estimate of a convex blob given as (v, u) pixels; returns
    (4, 2) in (u, v) order counterclockwise in (u, v) coordinates (consistent
    winding, arbitrary start corner)."""
    hull = _convex_hull(_row_extremes(pts_vu))
    if len(hull) < 4:
        return None
    centroid = hull.mean(axis=0)
    c0 = hull[np.argmax(((hull - centroid) ** 2).sum(axis=1))]
    c1 = hull[np.argmax(((hull - c0) ** 2).sum(axis=1))]
    seg = c1 - c0
    cross = (hull[:, 0] - c0[0]) * seg[1] - (hull[:, 1] - c0[1]) * seg[0]
    c2 = hull[np.argmax(cross)]
    c3 = hull[np.argmin(cross)]
    corners = np.array([c0, c1, c2, c3])
    center = corners.mean(axis=0)
    order = np.argsort(np.arctan2(corners[:, 1] - center[1], corners[:, 0] - center[0]))
    return corners[order]


def _quad_area(c: np.ndarray) -> float:
    s = 0.0
    for i in range(4):
        x0, y0 = c[i]
        x1, y1 = c[(i + 1) % 4]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


@dataclass(frozen=True)
class MarkerDetections:
    found: list[tuple[MarkerPayload, tuple[float, float]]]
    rejected: int  # candidates that failed rectification or checksum


def detect_markers(mask: np.ndarray, p: VisionParams = VisionParams()) -> MarkerDetections:
    """Decode floor tags from the label mask (marker-black blobs)."""
    binary = mask == LABEL_MARKER_BLACK
    labeled, n = ndimage.label(binary, structure=_CONN8)
    found: dict[tuple, tuple[MarkerPayload, tuple[float, float]]] = {}
    rejected = 0
    slices = ndimage.find_objects(labeled)
    for comp in range(1, n + 1):
        sl = slices[comp - 1]
        lvs, lus = np.nonzero(labeled[sl] == comp)
        if len(lvs) < 40:
            continue
        vs = lvs + sl[0].start
        us = lus + sl[1].start
        corners = _quad_corners(np.stack([vs, us], axis=1))
        if corners is None:
            rejected += 1
            continue
        if _quad_area(corners) < p.min_marker_area:
            continue
        grid = _sample_grid(mask, corners)
        if grid is None:
            rejected += 1
            continue
        payload = decode_grid(grid)
        if payload is None:
            rejected += 1
            continue
        key = (payload.kind, payload.id, payload.aux)
        if key not in found:
            found[key] = (payload, (float(us.mean()), float(vs.mean())))
    return MarkerDetections(found=list(found.values()), rejected=rejected)


def _sample_grid(mask: np.ndarray, corners: np.ndarray) -> np.ndarray | None:
    """Bilinear rectification of the quad into an 8x8 boolean grid.

    The black border extends half a cell outward of the outer cell centers,
    so corners (blob extremes) map slightly outside the cell-center lattice.
    """
    p00, p10, p11, p01 = corners[0], corners[1], corners[2], corners[3]
    h, w = mask.shape
    grid = np.zeros((GRID_SIZE, GRID_SIZE), dtype=bool)
    for i in range(GRID_SIZE):
        fy = (i + 0.5) / GRID_SIZE
        for j in range(GRID_SIZE):
            fx = (j + 0.5) / GRID_SIZE
            pt = (
                p00 * (1 - fx) * (1 - fy)
                + p10 * fx * (1 - fy)
                + p11 * fx * fy
                + p01 * (1 - fx) * fy
            )
            u, v = int(round(pt[0])), int(round(pt[1]))
            if not (0 <= u < w and 0 <= v < h):
                return None
            label = mask[v, u]
            if label == LABEL_MARKER_BLACK:
                grid[i, j] = True
            elif label != LABEL_MARKER_WHITE:
                return None
    return grid
