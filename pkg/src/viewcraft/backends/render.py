"""Deterministic procedural renderer for synthetic objects.

Orthographic, flat-shaded, painter's algorithm over convex faces.  Every
pixel is a pure function of (spec, view, size, scale, frame), which is what
makes rendered fixtures byte-stable across runs and machines.
"""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..errors import RenderFailure
from ..geometry import BoundingBox, SphericalView, spherical_to_pose
from ..imagebuf import ImageBuffer
from .types import PrimitivePart, ProceduralObjectSpec

BACKGROUND = 255
# Directional light fixed in the camera frame so shading travels with the view.
LIGHT_DIR = np.array([0.3, 0.5, 0.8], dtype=np.float64)
LIGHT_DIR = LIGHT_DIR / np.linalg.norm(LIGHT_DIR)
AMBIENT = 0.35
DIFFUSE = 0.65
JITTER_LO, JITTER_HI = 0.92, 1.08
DEFAULT_SCALE_FRAC = 0.30
CURVE_SEGMENTS = 32
# Faces whose camera-frame normal has nz >= -eps point away from the camera.
CULL_EPS = 1e-12

FRAME_MODES = ("fixed", "fit")


def _cuboid_faces(dims: tuple[float, float, float]) -> list[tuple[np.ndarray, int]]:
    hx, hy, hz = (d / 2.0 for d in dims)
    quads = [
        # +x, -x, +y, -y, top, bottom; wound so the normal points outward.
        [(hx, -hy, -hz), (hx, hy, -hz), (hx, hy, hz), (hx, -hy, hz)],
        [(-hx, -hy, -hz), (-hx, -hy, hz), (-hx, hy, hz), (-hx, hy, -hz)],
        [(-hx, hy, -hz), (-hx, hy, hz), (hx, hy, hz), (hx, hy, -hz)],
        [(-hx, -hy, -hz), (hx, -hy, -hz), (hx, -hy, hz), (-hx, -hy, hz)],
        [(-hx, -hy, hz), (hx, -hy, hz), (hx, hy, hz), (-hx, hy, hz)],
        [(-hx, -hy, -hz), (-hx, hy, -hz), (hx, hy, -hz), (hx, -hy, -hz)],
    ]
    return [(np.array(q, dtype=np.float64), i) for i, q in enumerate(quads)]


def _ring(rx: float, ry: float, z: float, segments: int) -> np.ndarray:
    theta = 2.0 * math.pi * np.arange(segments, dtype=np.float64) / segments
    return np.stack([rx * np.cos(theta), ry * np.sin(theta),
                     np.full(segments, z, dtype=np.float64)], axis=1)


def _cylinder_faces(dims, segments: int = CURVE_SEGMENTS):
    rx, ry, hz = dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0
    bot = _ring(rx, ry, -hz, segments)
    top = _ring(rx, ry, hz, segments)
    faces = []
    for k in range(segments):
        k1 = (k + 1) % segments
        faces.append((np.array([bot[k], bot[k1], top[k1], top[k]]), 0))
    faces.append((top.copy(), 1))
    faces.append((bot[::-1].copy(), 2))
    return faces


def _cone_faces(dims, segments: int = CURVE_SEGMENTS):
    rx, ry, hz = dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0
    base = _ring(rx, ry, -hz, segments)
    apex = np.array([0.0, 0.0, hz], dtype=np.float64)
    faces = []
    for k in range(segments):
        k1 = (k + 1) % segments
        faces.append((np.array([base[k], base[k1], apex]), 0))
    faces.append((base[::-1].copy(), 1))
    return faces


_BUILDERS = {"cuboid": _cuboid_faces, "cylinder": _cylinder_faces, "cone": _cone_faces}


def build_mesh(spec: ProceduralObjectSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Expand a spec into shaded-ready faces: (verts (k,3), base color (3,)).

    Base colors already include the per-face texture jitter drawn from
    ``texture_seed``, so two meshes from the same spec are identical.
    """
    parts: tuple[PrimitivePart, ...] = spec.as_parts()
    raw: list[tuple[np.ndarray, tuple[int, int, int]]] = []
    for part in parts:
        offset = np.array(part.offset, dtype=np.float64)
        for verts, color_idx in _BUILDERS[part.shape](part.dimensions):
            color = part.colors[color_idx % len(part.colors)]
            raw.append((verts + offset, color))
    rng = np.random.default_rng(spec.texture_seed)
    jitter = rng.uniform(JITTER_LO, JITTER_HI, size=len(raw))
    return [(verts, np.array(color, dtype=np.float64) * jitter[i])
            for i, (verts, color) in enumerate(raw)]


def _camera_verts(mesh, view: SphericalView) -> list[np.ndarray]:
    pose = spherical_to_pose(view)
    r = np.asarray(pose.rotation)
    t = np.asarray(pose.translation)
    return [verts @ r.T + t for verts, _ in mesh]


def _frame_transform(cam_faces: list[np.ndarray], size: tuple[int, int],
                     scale: float | None, frame: str) -> tuple[float, float, float]:
    """Scale and offsets mapping camera xy to pixel coordinates."""
    w, h = size
    if frame == "fixed":
        s = scale if scale is not None else DEFAULT_SCALE_FRAC * min(w, h)
        return s, w / 2.0, h / 2.0
    # "fit": object fills the canvas the same way an aligned crop does.
    allv = np.concatenate(cam_faces, axis=0)
    min_x, min_y = allv[:, 0].min(), allv[:, 1].min()
    max_x, max_y = allv[:, 0].max(), allv[:, 1].max()
    cw, ch = max_x - min_x, max_y - min_y
    if cw <= 0 or ch <= 0:
        raise RenderFailure("degenerate silhouette, cannot fit frame")
    if cw * h < ch * w:
        # Too tall: fill height, center horizontally.
        s = h / ch
        return s, (w - cw * s) / 2.0 - min_x * s, -min_y * s
    # Too wide (or exact): fill width, rest the content on the bottom edge.
    s = w / cw
    return s, -min_x * s, h - max_y * s


def render(spec: ProceduralObjectSpec, view: SphericalView,
           size: tuple[int, int] = (256, 256), scale: float | None = None,
           frame: str = "fixed") -> ImageBuffer:
    """Render a spec at a view onto a white canvas."""
    if frame not in FRAME_MODES:
        raise ValueError(f"frame must be one of {FRAME_MODES}")
    w, h = int(size[0]), int(size[1])
    if w <= 0 or h <= 0:
        raise RenderFailure(f"canvas size must be positive, got {size}")
    mesh = build_mesh(spec)
    cam_faces = _camera_verts(mesh, view)
    s, ox, oy = _frame_transform(cam_faces, (w, h), scale, frame)

    drawable = []
    for idx, verts in enumerate(cam_faces):
        normal = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        if normal[2] >= -CULL_EPS:
            continue
        unit = normal / np.linalg.norm(normal)
        intensity = AMBIENT + DIFFUSE * max(0.0, -float(unit @ LIGHT_DIR))
        shade = np.floor(mesh[idx][1] * intensity + 0.5)
        color = np.clip(shade, 0, 255).astype(np.uint8)
        depth = float(verts[:, 2].mean())
        pts = np.stack([ox + s * verts[:, 0], oy + s * verts[:, 1]], axis=1)
        drawable.append((depth, idx, pts, color))

    canvas = np.full((h, w, 3), BACKGROUND, dtype=np.uint8)
    # Painter's algorithm: farthest face first; index keeps ties stable.
    for _, _, pts, color in sorted(drawable, key=lambda f: (-f[0], f[1])):
        mask = kernels.convex_mask(h, w, pts)
        canvas[mask] = color
    return ImageBuffer.from_array(canvas)


def silhouette_mask(spec: ProceduralObjectSpec, view: SphericalView,
                    size: tuple[int, int] = (256, 256), scale: float | None = None,
                    frame: str = "fixed") -> np.ndarray:
    """Boolean object coverage: union of every face, no culling or shading."""
    w, h = int(size[0]), int(size[1])
    mesh = build_mesh(spec)
    cam_faces = _camera_verts(mesh, view)
    s, ox, oy = _frame_transform(cam_faces, (w, h), scale, frame)
    mask = np.zeros((h, w), dtype=bool)
    for verts in cam_faces:
        pts = np.stack([ox + s * verts[:, 0], oy + s * verts[:, 1]], axis=1)
        mask |= kernels.convex_mask(h, w, pts)
    return mask


def projected_bounds(spec: ProceduralObjectSpec, view: SphericalView,
                     size: tuple[int, int] = (256, 256), scale: float | None = None,
                     frame: str = "fixed") -> tuple[float, float, float, float]:
    """Continuous (min_x, min_y, max_x, max_y) of all projected vertices."""
    mesh = build_mesh(spec)
    cam_faces = _camera_verts(mesh, view)
    s, ox, oy = _frame_transform(cam_faces, size, scale, frame)
    allv = np.concatenate(cam_faces, axis=0)
    xs = ox + s * allv[:, 0]
    ys = oy + s * allv[:, 1]
    return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())


def analytic_silhouette_bbox(spec: ProceduralObjectSpec, view: SphericalView,
                             size: tuple[int, int] = (256, 256),
                             scale: float | None = None,
                             frame: str = "fixed") -> BoundingBox:
    """Pixel bbox predicted from projected vertices alone.

    A pixel belongs to the silhouette when its center falls inside, so the
    first covered column is ceil(min_x - 0.5).  Curved rims can round this
    off by one pixel; treat comparisons against rendered output as +/-1.
    """
    min_x, min_y, max_x, max_y = projected_bounds(spec, view, size, scale, frame)
    w, h = int(size[0]), int(size[1])
    x0 = max(0, math.ceil(min_x - 0.5))
    y0 = max(0, math.ceil(min_y - 0.5))
    x1 = min(w - 1, math.floor(max_x - 0.5))
    y1 = min(h - 1, math.floor(max_y - 0.5))
    if x1 < x0 or y1 < y0:
        raise RenderFailure("object projects entirely outside the canvas")
    return BoundingBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
