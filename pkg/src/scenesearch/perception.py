"""Synthetic per-category detector channel.

Replaces a learned perception stack with a geometric noise model while
keeping its output contract: for each category the channel may emit a
detection carrying a presence probability, a pixel center, a scale
(inversely proportional to distance, calibrated so scale 1.0 <=> 0.4 m),
and a relative-pose estimate in object-frame view angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraModel, CameraPose, in_frustum, project, wrap_angle
from .scene import CATEGORIES, SceneSpec, category

# Distance at which an object appears at unit scale.
REFERENCE_DISTANCE = 0.4

# False positives carry a scale drawn from this implied-distance window.
FALSE_POSITIVE_DISTANCE = (0.2, 1.2)


class PerceptionError(ValueError):
    pass


class NonPositive(PerceptionError):
    pass


class UnknownCategory(PerceptionError):
    pass


def scale_from_distance(d: float) -> float:
    """Apparent scale of an object at distance d: sigma = 0.4 / d."""
    if d <= 0.0:
        raise NonPositive(f"distance must be > 0: {d}")
    return REFERENCE_DISTANCE / d


def distance_from_scale(sigma: float) -> float:
    """Inverse of :func:`scale_from_distance`: d = 0.4 / sigma."""
    if sigma <= 0.0:
        raise NonPositive(f"scale must be > 0: {sigma}")
    return REFERENCE_DISTANCE / sigma


@dataclass(frozen=True)
class Detection:
    """One category's perceptual output for a single frame."""

    category: int
    presence_prob: float
    pixel_center: np.ndarray
    scale: float
    azimuth_rel: float  # camera azimuth in the object's yaw frame
    elevation: float
    azimuth_std: float
    elevation_std: float

    def __post_init__(self):
        object.__setattr__(self, "pixel_center", np.asarray(self.pixel_center, dtype=float))
        object.__setattr__(self, "azimuth_rel", float(wrap_angle(self.azimuth_rel)))
        object.__setattr__(self, "elevation", float(wrap_angle(self.elevation)))
        if not 0.0 <= self.presence_prob <= 1.0:
            raise PerceptionError(f"presence_prob out of [0,1]: {self.presence_prob}")
        if self.scale <= 0.0:
            raise PerceptionError(f"scale must be > 0: {self.scale}")


@dataclass(frozen=True)
class ObservationBundle:
    """Per-category detections plus the viewpoint that generated them.

    ``detections`` holds at most one entry per category; categories the
    channel declared absent map to None in ``presence`` with probability
    ``false_positive_rate`` attached instead of the hit rate.
    """

    detections: dict  # category id -> Detection | None
    presence: dict  # category id -> float (asserted presence probability)
    camera: CameraPose


@dataclass(frozen=True)
class NoiseConfig:
    pixel_noise_std: float = 4.0
    scale_noise_rel_std: float = 0.05
    pose_noise_std: float = 0.1
    true_positive_rate: float = 0.95
    false_positive_rate: float = 0.0
    occlusion_enabled: bool = True

    def __post_init__(self):
        for name in ("pixel_noise_std", "scale_noise_rel_std", "pose_noise_std"):
            if getattr(self, name) < 0.0:
                raise PerceptionError(f"{name} must be >= 0")
        for name in ("true_positive_rate", "false_positive_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise PerceptionError(f"{name} out of [0,1]")

    @classmethod
    def noiseless(cls) -> "NoiseConfig":
        return cls(0.0, 0.0, 0.0, 1.0, 0.0, False)

    def to_json(self) -> dict:
        return {
            "pixel_noise_std": self.pixel_noise_std,
            "scale_noise_rel_std": self.scale_noise_rel_std,
            "pose_noise_std": self.pose_noise_std,
            "true_positive_rate": self.true_positive_rate,
            "false_positive_rate": self.false_positive_rate,
            "occlusion_enabled": self.occlusion_enabled,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "NoiseConfig":
        return cls(**doc)


def _disk_overlap_fraction(alpha_target: float, alpha_occluder: float, gamma: float) -> float:
    """Fraction of a disk of angular radius ``alpha_target`` covered by one
    of radius ``alpha_occluder`` whose center is ``gamma`` away.

    Planar circle-circle intersection on the small-angle chart; adequate for
    the proxy-sphere angular sizes in this workspace.
    """
    if gamma >= alpha_target + alpha_occluder:
        return 0.0
    if gamma <= abs(alpha_occluder - alpha_target):
        if alpha_occluder >= alpha_target:
            return 1.0
        return (alpha_occluder / alpha_target) ** 2
    r1, r2, d = alpha_target, alpha_occluder, gamma
    part1 = r1**2 * math.acos((d**2 + r1**2 - r2**2) / (2 * d * r1))
    part2 = r2**2 * math.acos((d**2 + r2**2 - r1**2) / (2 * d * r2))
    part3 = 0.5 * math.sqrt(
        max((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2), 0.0)
    )
    return float(np.clip((part1 + part2 - part3) / (math.pi * r1**2), 0.0, 1.0))


def visibility(
    scene: SceneSpec, camera: CameraPose, model: CameraModel, cat_id: int,
    occlusion_enabled: bool = True,
) -> tuple[bool, float]:
    """Frustum membership and occlusion fraction for one category.

    The occlusion fraction is the angular overlap of the target's proxy
    sphere with proxy spheres of strictly nearer objects, clipped to [0, 1].
    """
    try:
        obj = scene.find(cat_id)
    except Exception as exc:
        raise UnknownCategory(str(exc)) from None
    visible = in_frustum(camera, model, obj.position)
    if not visible or not occlusion_enabled:
        return visible, 0.0

    to_target = obj.position - camera.position
    dist = float(np.linalg.norm(to_target))
    dir_target = to_target / dist
    alpha_target = math.asin(min(1.0, category(obj.category).proxy_radius / dist))
    occlusion = 0.0
    for other in scene.objects:
        if other.category == cat_id:
            continue
        to_other = other.position - camera.position
        d_other = float(np.linalg.norm(to_other))
        if d_other >= dist:
            continue
        gamma = math.acos(np.clip(dir_target @ (to_other / d_other), -1.0, 1.0))
        alpha_other = math.asin(min(1.0, category(other.category).proxy_radius / d_other))
        occlusion += _disk_overlap_fraction(alpha_target, alpha_other, gamma)
    return True, float(np.clip(occlusion, 0.0, 1.0))


def _camera_view_angles(camera_position: np.ndarray, obj_position: np.ndarray, yaw: float):
    d = camera_position - obj_position
    r = float(np.linalg.norm(d))
    elevation = math.asin(np.clip(d[2] / r, -1.0, 1.0))
    azimuth_rel = wrap_angle(math.atan2(d[1], d[0]) - yaw)
    return float(azimuth_rel), float(elevation)


def observe(
    scene: SceneSpec,
    camera: CameraPose,
    model: CameraModel,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> ObservationBundle:
    """Run the detector channel over every category for the current frame.

    Visible, unoccluded objects are detected with probability
    ``true_positive_rate * (1 - occlusion_fraction)``; absent or missed
    categories may still yield a false positive at a uniform pixel/scale.
    Deterministic given the generator state.
    """
    detections: dict[int, Detection | None] = {}
    presence: dict[int, float] = {}
    present = {o.category for o in scene.objects}
    for spec in CATEGORIES:
        cat = spec.id
        det = None
        if cat in present:
            obj = scene.find(cat)
            visible, occ = visibility(scene, camera, model, cat, noise.occlusion_enabled)
            p_detect = noise.true_positive_rate * (1.0 - occ) if visible else 0.0
            if rng.uniform() < p_detect:
                pixel, _ = project(camera, model, obj.position)
                pixel = pixel + rng.normal(0.0, noise.pixel_noise_std, size=2) \
                    if noise.pixel_noise_std > 0 else pixel
                dist = float(np.linalg.norm(camera.position - obj.position))
                scale = scale_from_distance(dist)
                if noise.scale_noise_rel_std > 0:
                    scale *= max(1.0 + rng.normal(0.0, noise.scale_noise_rel_std), 1e-3)
                azim, elev = _camera_view_angles(camera.position, obj.position, obj.yaw)
                if math.isinf(spec.symmetry_order):
                    azim = float(rng.uniform(-math.pi, math.pi))
                    azim_std = math.pi
                else:
                    azim += float(rng.normal(0.0, noise.pose_noise_std)) if noise.pose_noise_std > 0 else 0.0
                    azim_std = noise.pose_noise_std
                if noise.pose_noise_std > 0:
                    elev += float(rng.normal(0.0, noise.pose_noise_std))
                det = Detection(
                    category=cat,
                    presence_prob=noise.true_positive_rate,
                    pixel_center=pixel,
                    scale=scale,
                    azimuth_rel=azim,
                    elevation=elev,
                    azimuth_std=azim_std,
                    elevation_std=noise.pose_noise_std,
                )
        if det is None and cat not in present:
            if rng.uniform() < noise.false_positive_rate:
                pixel = rng.uniform([0.0, 0.0], [model.image_width, model.image_height])
                dist = rng.uniform(*FALSE_POSITIVE_DISTANCE)
                det = Detection(
                    category=cat,
                    presence_prob=noise.true_positive_rate,
                    pixel_center=pixel,
                    scale=scale_from_distance(float(dist)),
                    azimuth_rel=float(rng.uniform(-math.pi, math.pi)),
                    elevation=float(rng.uniform(0.0, math.pi / 2)),
                    azimuth_std=math.pi,
                    elevation_std=math.pi,
                )
        detections[cat] = det
        presence[cat] = noise.true_positive_rate if det is not None else noise.false_positive_rate
    return ObservationBundle(detections, presence, camera)
