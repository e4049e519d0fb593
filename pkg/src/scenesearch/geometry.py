"""Pinhole-camera and look-at viewpoint geometry.

Conventions (fixed for the whole package):

* World frame: right-handed, z up, origin at the table center, units meters.
* Camera frame: optical axis along -z, x right, y up (OpenGL style).
  The rotation matrix of a :class:`CameraPose` maps camera coordinates to
  world coordinates (columns = camera axes expressed in the world frame).
* Image frame: origin at the top-left corner, u right, v down, units pixels.
* Angles in radians, azimuth wrapped to [-pi, pi).

All functions here are pure; values are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAU = 2.0 * math.pi

# Depth below this counts as "behind" the camera.
MIN_DEPTH = 1e-6

# Elevation closer than this to +-pi/2 triggers the zenith up-vector tie-break.
ZENITH_EPS = 1e-9


class GeometryError(ValueError):
    """Base class for geometry contract violations."""


class ZeroRange(GeometryError):
    """Camera position coincides with the look-at point."""


class NotInFront(GeometryError):
    """Point does not lie strictly in front of the camera."""


class OutOfImage(GeometryError):
    """Pixel coordinate outside the image rectangle."""


def wrap_angle(theta):
    """Wrap an angle (scalar or array) to [-pi, pi)."""
    return (np.asarray(theta) + math.pi) % TAU - math.pi


@dataclass(frozen=True)
class Viewpoint:
    """Look-at camera parameterization: gaze point plus spherical coordinates.

    ``range`` is the camera distance from the look-at point, ``elevation``
    the angle above the horizontal plane in [0, pi/2], ``azimuth`` the
    angle about the world z axis in [-pi, pi).
    """

    lookat: np.ndarray
    range: float
    elevation: float
    azimuth: float

    def __post_init__(self):
        object.__setattr__(self, "lookat", np.asarray(self.lookat, dtype=float))
        object.__setattr__(self, "azimuth", float(wrap_angle(self.azimuth)))
        if not np.all(np.isfinite(self.lookat)) or self.lookat.shape != (3,):
            raise GeometryError(f"bad look-at point: {self.lookat!r}")
        if not self.range > 0.0:
            raise GeometryError(f"range must be > 0, got {self.range}")
        if not 0.0 <= self.elevation <= math.pi / 2:
            raise GeometryError(f"elevation out of [0, pi/2]: {self.elevation}")


@dataclass(frozen=True)
class CameraPose:
    """Rigid camera pose: position and camera-to-world rotation matrix."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))
        r = self.orientation
        if r.shape != (3, 3):
            raise GeometryError("orientation must be 3x3")
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-7) or np.linalg.det(r) < 0:
            raise GeometryError("orientation must be a proper rotation")

    @property
    def forward(self) -> np.ndarray:
        """Unit optical-axis direction in world coordinates (-z of camera)."""
        return -self.orientation[:, 2]


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics: square default image, symmetric principal point."""

    image_width: int = 480
    image_height: int = 480
    vertical_fov: float = math.radians(60.0)

    def __post_init__(self):
        if not 0.0 < self.vertical_fov < math.pi:
            raise GeometryError(f"fov out of (0, pi): {self.vertical_fov}")

    @property
    def focal_pixels(self) -> float:
        return (self.image_height / 2.0) / math.tan(self.vertical_fov / 2.0)

    @property
    def cx(self) -> float:
        return self.image_width / 2.0

    @property
    def cy(self) -> float:
        return self.image_height / 2.0


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-9:
            raise GeometryError("ray direction must be unit length")

    def point_at(self, depth: float) -> np.ndarray:
        return self.origin + depth * self.direction


def _lookat_rotation(forward: np.ndarray) -> np.ndarray:
    """Camera-to-world rotation whose -z axis is `forward`, up toward world +z.

    At the zenith singularity the camera up axis is tied to world +x.
    """
    f = forward / np.linalg.norm(forward)
    up_hint = np.array([0.0, 0.0, 1.0])
    x_cam = np.cross(f, up_hint)
    nx = np.linalg.norm(x_cam)
    if nx < ZENITH_EPS:
        y_cam = np.array([1.0, 0.0, 0.0])
        x_cam = np.cross(y_cam, -f)
        x_cam /= np.linalg.norm(x_cam)
    else:
        x_cam /= nx
        y_cam = np.cross(x_cam, f)
    return np.column_stack([x_cam, y_cam, -f])


def viewpoint_to_camera_pose(v: Viewpoint) -> CameraPose:
    """Realize a look-at viewpoint as a rigid camera pose.

    Position = lookat + range * (cos(el)cos(az), cos(el)sin(az), sin(el));
    the optical axis points from the position back to the look-at point.
    """
    ce, se = math.cos(v.elevation), math.sin(v.elevation)
    offset = v.range * np.array([ce * math.cos(v.azimuth), ce * math.sin(v.azimuth), se])
    position = v.lookat + offset
    return CameraPose(position, _lookat_rotation(-offset))


def camera_pose_to_viewpoint(c: CameraPose, lookat) -> Viewpoint:
    """Spherical coordinates of the camera position about `lookat`.

    Raises :class:`ZeroRange` when the position coincides with the look-at
    point. At the zenith the azimuth tie-break returns 0.
    """
    lookat = np.asarray(lookat, dtype=float)
    d = c.position - lookat
    r = np.linalg.norm(d)
    if r == 0.0:
        raise ZeroRange("camera position equals look-at point")
    elevation = math.asin(np.clip(d[2] / r, -1.0, 1.0))
    horiz = math.hypot(d[0], d[1])
    azimuth = 0.0 if horiz < ZENITH_EPS * r else math.atan2(d[1], d[0])
    return Viewpoint(lookat, r, elevation, azimuth)


def project(c: CameraPose, m: CameraModel, p) -> tuple[np.ndarray, float]:
    """Pinhole projection of a world point to (pixel, depth).

    Depth is the distance along the optical axis; points with depth below
    :data:`MIN_DEPTH` raise :class:`NotInFront`.
    """
    q = c.orientation.T @ (np.asarray(p, dtype=float) - c.position)
    depth = -q[2]
    if depth <= MIN_DEPTH:
        raise NotInFront(f"depth {depth} not in front of camera")
    f = m.focal_pixels
    u = m.cx + f * q[0] / depth
    v = m.cy - f * q[1] / depth
    return np.array([u, v]), depth


def backproject(c: CameraPose, m: CameraModel, pixel) -> Ray:
    """Ray from the camera center through a pixel.

    For any depth d > 0, projecting ``origin + d * direction`` returns the
    input pixel.
    """
    u, v = float(pixel[0]), float(pixel[1])
    if not (0.0 <= u < m.image_width and 0.0 <= v < m.image_height):
        raise OutOfImage(f"pixel ({u}, {v}) outside image")
    f = m.focal_pixels
    d_cam = np.array([(u - m.cx) / f, -(v - m.cy) / f, -1.0])
    d_world = c.orientation @ d_cam
    return Ray(c.position, d_world / np.linalg.norm(d_world))


def in_frustum(c: CameraPose, m: CameraModel, p) -> bool:
    """True iff the point has positive depth and projects inside the image.

    The pixel rectangle is half-open: [0, W) x [0, H).
    """
    q = c.orientation.T @ (np.asarray(p, dtype=float) - c.position)
    depth = -q[2]
    if depth <= MIN_DEPTH:
        return False
    f = m.focal_pixels
    u = m.cx + f * q[0] / depth
    v = m.cy - f * q[1] / depth
    return 0.0 <= u < m.image_width and 0.0 <= v < m.image_height


def frustum_mask(c: CameraPose, m: CameraModel, points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`in_frustum` over an (N, 3) point array."""
    q = (np.asarray(points, dtype=float) - c.position) @ c.orientation
    depth = -q[:, 2]
    f = m.focal_pixels
    with np.errstate(divide="ignore", invalid="ignore"):
        u = m.cx + f * q[:, 0] / depth
        v = m.cy - f * q[:, 1] / depth
    return (
        (depth > MIN_DEPTH)
        & (u >= 0.0)
        & (u < m.image_width)
        & (v >= 0.0)
        & (v < m.image_height)
    )


def rotation_error(a: CameraPose, b: CameraPose) -> float:
    """Geodesic angle between two orientations, in [0, pi]."""
    cos_angle = (np.trace(a.orientation.T @ b.orientation) - 1.0) / 2.0
    return math.acos(np.clip(cos_angle, -1.0, 1.0))
