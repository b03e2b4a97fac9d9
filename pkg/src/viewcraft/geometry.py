"""Pose representation, spherical view parametrization and view-delta arithmetic.

Conventions (used by every other module):

* World frame is right-handed with z up; the edited object sits at the origin.
* A camera at ``SphericalView(azimuth, elevation, radius)`` is located at
  ``radius * (cos el * cos az, cos el * sin az, sin el)`` and looks at the
  origin.  The default camera perspective is ``(0, 0, 1)``.
* ``Pose`` maps world points into the camera frame: ``p_cam = R @ p + T``.
  Camera axes are x right, y down, z forward, so the camera center is
  ``C = -R.T @ T``.
* Angles are degrees at every public interface.  Azimuth is normalized to
  ``[-180, 180)``; "right" is +azimuth, "up" is +elevation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleDegenerate

ORTHO_TOL = 1e-9
POLE_MARGIN_DEG = 1e-6
MIN_RADIUS = 1e-6


def normalize_azimuth(deg: float) -> float:
    """Wrap an azimuth into [-180, 180)."""
    return ((float(deg) + 180.0) % 360.0) - 180.0


def wrap_angle_diff(a: float, b: float) -> float:
    """Signed difference a - b wrapped into (-180, 180]."""
    d = ((float(a) - float(b) + 180.0) % 360.0) - 180.0
    return 180.0 if d == -180.0 else d


def _det3(m: np.ndarray) -> float:
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def project_rotation(m: np.ndarray) -> np.ndarray:
    """Nearest proper rotation to ``m`` (SVD projection, det corrected to +1)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=np.float64))
    r = u @ vt
    if _det3(r) < 0.0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return r


@dataclass(frozen=True)
class Pose:
    """Rigid transform world -> camera; rotation must be a proper rotation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > ORTHO_TOL:
            raise ValueError(f"rotation not orthonormal (|R^T R - I|_inf = {err:.3e})")
        det = _det3(r)
        if abs(det - 1.0) > ORTHO_TOL:
            raise ValueError(f"det(R) = {det!r}, expected +1 (no reflections)")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(rotation, translation, project: bool = False) -> "Pose":
        """Build a pose, optionally snapping the rotation onto SO(3) first."""
        r = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
        if project:
            r = project_rotation(r)
        return Pose(r, translation)

    def camera_center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation

    def to_json(self) -> dict:
        return {
            "rotation": [float(v) for v in self.rotation.reshape(9)],
            "translation": [float(v) for v in self.translation],
        }

    @staticmethod
    def from_json(obj: dict) -> "Pose":
        return Pose(np.array(obj["rotation"], dtype=np.float64).reshape(3, 3),
                    np.array(obj["translation"], dtype=np.float64))


@dataclass(frozen=True)
class SphericalView:
    """Camera on a sphere looking at the origin.

    ``clamped`` is metadata set by :func:`apply_view_delta` when the elevation
    or radius had to be clamped; it does not participate in equality and is
    not serialized.
    """

    azimuth: float
    elevation: float
    radius: float
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "azimuth", normalize_azimuth(self.azimuth))
        object.__setattr__(self, "elevation", float(self.elevation))
        object.__setattr__(self, "radius", float(self.radius))
        if not -90.0 <= self.elevation <= 90.0:
            raise ValueError(f"elevation {self.elevation} outside [-90, 90]")
        if not self.radius > 0.0:
            raise ValueError(f"radius {self.radius} must be positive")

    def to_json(self) -> dict:
        return {"azimuth": self.azimuth, "elevation": self.elevation,
                "radius": self.radius}

    @staticmethod
    def from_json(obj: dict) -> "SphericalView":
        return SphericalView(obj["azimuth"], obj["elevation"], obj["radius"])


DEFAULT_VIEW = SphericalView(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ViewDelta:
    """Additive change of a spherical view, in degrees / scene units."""

    d_azimuth: float = 0.0
    d_elevation: float = 0.0
    d_radius: float = 0.0

    def is_zero(self) -> bool:
        return self.d_azimuth == 0.0 and self.d_elevation == 0.0 and self.d_radius == 0.0

    def to_json(self) -> dict:
        return {"d_azimuth": self.d_azimuth, "d_elevation": self.d_elevation,
                "d_radius": self.d_radius}

    @staticmethod
    def from_json(obj: dict) -> "ViewDelta":
        return ViewDelta(obj.get("d_azimuth", 0.0), obj.get("d_elevation", 0.0),
                         obj.get("d_radius", 0.0))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box; (x0, y0) top-left inclusive, width/height >= 1."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        for name in ("x0", "y0", "width", "height"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"degenerate box {self.width}x{self.height}")

    @property
    def x1(self) -> int:
        """One past the rightmost column."""
        return self.x0 + self.width

    @property
    def y1(self) -> int:
        """One past the bottom row."""
        return self.y0 + self.height

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def contains(self, other: "BoundingBox") -> bool:
        return (self.x0 <= other.x0 and self.y0 <= other.y0
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def fits_image(self, width: int, height: int) -> bool:
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= width and self.y1 <= height

    def to_json(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "width": self.width,
                "height": self.height}

    @staticmethod
    def from_json(obj: dict) -> "BoundingBox":
        return BoundingBox(obj["x0"], obj["y0"], obj["width"], obj["height"])


# --- operations -------------------------------------------------------------

def compose(a: Pose, b: Pose) -> Pose:
    """Pose applying ``b`` first, then ``a``: (R_a R_b, R_a T_b + T_a)."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(p: Pose) -> Pose:
    rt = p.rotation.T
    return Pose(rt, -rt @ p.translation)


def relative_pose(from_pose: Pose, to_pose: Pose) -> Pose:
    """Pose ``d`` with compose(d, from_pose) == to_pose."""
    return compose(to_pose, invert(from_pose))


def _camera_axes(az_rad: float, el_rad: float):
    ca, sa = math.cos(az_rad), math.sin(az_rad)
    ce, se = math.cos(el_rad), math.sin(el_rad)
    forward = np.array([-ce * ca, -ce * sa, -se])
    right = np.array([-sa, ca, 0.0])  # continuous in azimuth, valid at poles
    down = np.cross(forward, right)
    return right, down, forward, np.array([ce * ca, ce * sa, se])


def spherical_to_pose(v: SphericalView) -> Pose:
    """Embed a spherical view as a world->camera pose looking at the origin."""
    az = math.radians(v.azimuth)
    el = math.radians(v.elevation)
    right, down, forward, unit_center = _camera_axes(az, el)
    r = np.stack([right, down, forward])
    t = -r @ (v.radius * unit_center)
    return Pose(r, t)


def pose_to_spherical(p: Pose) -> SphericalView:
    """Recover the spherical view from the camera center of ``p``.

    Raises :class:`PoleDegenerate` when the center lies within
    ``POLE_MARGIN_DEG`` of the vertical axis, where azimuth is undefined.
    """
    c = p.camera_center()
    radius = float(np.linalg.norm(c))
    if radius <= 0.0:
        raise PoleDegenerate(90.0)
    elevation = math.degrees(math.asin(max(-1.0, min(1.0, c[2] / radius))))
    if abs(elevation) >= 90.0 - POLE_MARGIN_DEG:
        raise PoleDegenerate(elevation)
    azimuth = math.degrees(math.atan2(c[1], c[0]))
    return SphericalView(azimuth, elevation, radius)


def apply_view_delta(current: SphericalView, d: ViewDelta) -> SphericalView:
    """Additive view update; elevation and radius clamp instead of erroring."""
    azimuth = normalize_azimuth(current.azimuth + d.d_azimuth)
    elevation = current.elevation + d.d_elevation
    radius = current.radius + d.d_radius
    clamped = False
    if elevation > 90.0:
        elevation, clamped = 90.0, True
    elif elevation < -90.0:
        elevation, clamped = -90.0, True
    if radius < MIN_RADIUS:
        radius, clamped = MIN_RADIUS, True
    return SphericalView(azimuth, elevation, radius, clamped=clamped)


def view_difference(target: SphericalView, base: SphericalView) -> ViewDelta:
    """Delta ``d`` with apply_view_delta(base, d) == target (up to clamping)."""
    return ViewDelta(
        d_azimuth=wrap_angle_diff(target.azimuth, base.azimuth),
        d_elevation=target.elevation - base.elevation,
        d_radius=target.radius - base.radius,
    )
