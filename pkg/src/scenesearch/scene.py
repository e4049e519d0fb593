"""Active-search benchmark environment.

A scene is a 1 m x 1 m table (centered at the origin, z up) with one to
five objects, at most one per category. The agent moves a pinhole camera
with clipped 6-DOF relative actions and must reach an object-centric goal
viewpoint within 350 steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .geometry import (
    TAU,
    CameraPose,
    Viewpoint,
    rotation_error,
    viewpoint_to_camera_pose,
    wrap_angle,
)

TABLE_HALF = 0.5
CAMERA_Z_MIN = 0.05
CAMERA_Z_MAX = 0.6
MAX_STEPS = 350
ACTION_BOUND = 0.5
MIN_SEPARATION = 0.15
PLACEMENT_ATTEMPTS = 10_000

SUCCESS_TRANS = 0.075
SUCCESS_ROT = 0.5

GOAL_RANGE = 0.4
GOAL_ELEVATION_BOUNDS = (0.15, 1.40)

INFINITE = float("inf")


class SceneError(ValueError):
    pass


class PlacementFailure(SceneError):
    """Rejection sampling exhausted its attempt budget."""


class EpisodeFinished(SceneError):
    """apply_action called on a finished episode."""


@dataclass(frozen=True)
class ObjectCategory:
    id: int
    name: str
    proxy_radius: float
    symmetry_order: float  # positive integer or math.inf

    def __post_init__(self):
        if self.proxy_radius <= 0.0:
            raise SceneError(f"proxy_radius must be > 0: {self}")


# The five YCB categories of the benchmark. Proxy radii are bounding-sphere
# stand-ins (no mesh geometry); symmetry orders encode rotational symmetry
# about the vertical axis (inf = azimuth unidentifiable from appearance).
CATEGORIES = (
    ObjectCategory(0, "master_chef_can", 0.06, INFINITE),
    ObjectCategory(1, "cracker_box", 0.10, 2),
    ObjectCategory(2, "sugar_box", 0.08, 2),
    ObjectCategory(3, "tomato_soup_can", 0.05, INFINITE),
    ObjectCategory(4, "mustard_bottle", 0.07, 1),
)

CATEGORY_BY_ID = {c.id: c for c in CATEGORIES}


def category(cat_id: int) -> ObjectCategory:
    try:
        return CATEGORY_BY_ID[cat_id]
    except KeyError:
        raise SceneError(f"unknown category id {cat_id}") from None


@dataclass(frozen=True)
class ObjectInstance:
    category: int
    position: np.ndarray  # center of the proxy sphere; z = proxy radius
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "yaw", float(wrap_angle(self.yaw)))


@dataclass(frozen=True)
class SceneSpec:
    objects: tuple[ObjectInstance, ...]
    table_color: tuple[float, float, float]
    seed: int

    def __post_init__(self):
        cats = [o.category for o in self.objects]
        if not 1 <= len(cats) <= 5:
            raise SceneError(f"scene must hold 1-5 objects, got {len(cats)}")
        if len(set(cats)) != len(cats):
            raise SceneError("duplicate categories in scene")

    def find(self, cat_id: int) -> ObjectInstance:
        for obj in self.objects:
            if obj.category == cat_id:
                return obj
        raise SceneError(f"category {cat_id} not present in scene")

    def to_json(self) -> dict:
        return {
            "seed": int(self.seed),
            "table_color": [float(c) for c in self.table_color],
            "objects": [
                {
                    "category": int(o.category),
                    "name": category(o.category).name,
                    "position": [float(x) for x in o.position],
                    "yaw": float(o.yaw),
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SceneSpec":
        objects = tuple(
            ObjectInstance(int(o["category"]), np.array(o["position"], dtype=float), float(o["yaw"]))
            for o in doc["objects"]
        )
        return cls(objects, tuple(doc["table_color"]), int(doc["seed"]))


@dataclass(frozen=True)
class Action:
    """Clipped 6-DOF relative move: translation plus Euler-angle rotation.

    Components are clamped to [-0.5, 0.5] on construction.
    """

    dpos: np.ndarray
    drot: np.ndarray

    def __post_init__(self):
        dpos = np.clip(np.asarray(self.dpos, dtype=float), -ACTION_BOUND, ACTION_BOUND)
        drot = np.clip(np.asarray(self.drot, dtype=float), -ACTION_BOUND, ACTION_BOUND)
        object.__setattr__(self, "dpos", dpos)
        object.__setattr__(self, "drot", drot)

    @classmethod
    def zero(cls) -> "Action":
        return cls(np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class GoalSpec:
    """Goal camera viewpoint expressed in the target object's frame.

    The world-frame goal pose is recovered by anchoring the viewpoint at the
    object's true position and adding the object yaw to the azimuth.
    """

    target_category: int
    range: float
    elevation: float
    azimuth: float

    def __post_init__(self):
        if self.range <= 0.0:
            raise SceneError(f"goal range must be > 0: {self.range}")

    def to_json(self) -> dict:
        return {
            "target_category": int(self.target_category),
            "range": float(self.range),
            "elevation": float(self.elevation),
            "azimuth": float(self.azimuth),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GoalSpec":
        return cls(
            int(doc["target_category"]),
            float(doc["range"]),
            float(doc["elevation"]),
            float(doc["azimuth"]),
        )


@dataclass(frozen=True)
class EnvState:
    scene: SceneSpec
    camera: CameraPose
    step_count: int = 0
    done: bool = False


def generate_scene(seed: int, num_objects: int, categories=CATEGORIES) -> SceneSpec:
    """Sample object placements uniformly over the table, rejecting overlaps.

    Deterministic given the seed. Object centers keep a proxy-radius margin
    from the table edge and a pairwise separation of at least
    :data:`MIN_SEPARATION`.
    """
    if not 1 <= num_objects <= min(5, len(categories)):
        raise SceneError(f"num_objects {num_objects} out of range for {len(categories)} categories")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(categories), size=num_objects, replace=False)
    table_color = tuple(rng.uniform(0.0, 1.0, size=3))

    placed: list[ObjectInstance] = []
    for idx in chosen:
        cat = categories[idx]
        lim = TABLE_HALF - cat.proxy_radius
        for _ in range(PLACEMENT_ATTEMPTS):
            xy = rng.uniform(-lim, lim, size=2)
            if all(
                np.hypot(*(xy - o.position[:2])) >= MIN_SEPARATION for o in placed
            ):
                break
        else:
            raise PlacementFailure(f"could not place {cat.name} after {PLACEMENT_ATTEMPTS} attempts")
        yaw = rng.uniform(-math.pi, math.pi)
        placed.append(ObjectInstance(cat.id, np.array([xy[0], xy[1], cat.proxy_radius]), yaw))
    return SceneSpec(tuple(placed), table_color, seed)


def initial_viewpoint() -> Viewpoint:
    """Start pose of every episode: table center at 0.65 m, pi/4 elevation."""
    return Viewpoint(np.zeros(3), 0.65, math.pi / 4, 0.0)


def initial_state(scene: SceneSpec) -> EnvState:
    return EnvState(scene, viewpoint_to_camera_pose(initial_viewpoint()))


def _clamp_box(p: np.ndarray) -> np.ndarray:
    return np.array(
        [
            np.clip(p[0], -TABLE_HALF, TABLE_HALF),
            np.clip(p[1], -TABLE_HALF, TABLE_HALF),
            np.clip(p[2], CAMERA_Z_MIN, CAMERA_Z_MAX),
        ]
    )


def _project_out_of_spheres(p: np.ndarray, scene: SceneSpec) -> np.ndarray:
    """Push the camera onto the surface of any penetrated proxy sphere.

    Projection is radial from the sphere center; when that would violate the
    camera height bounds, the push direction is restricted to the horizontal
    plane (object centers keep a radius margin from the table edge, so a
    horizontal push never exits the table box). Overlapping spheres are
    resolved iteratively.
    """
    for _ in range(32):
        violated = None
        for obj in scene.objects:
            radius = category(obj.category).proxy_radius
            if np.linalg.norm(p - obj.position) < radius:
                violated = (obj, radius)
                break
        if violated is None:
            return p
        obj, radius = violated
        d = p - obj.position
        dist = np.linalg.norm(d)
        if dist < 1e-12:
            d = np.array([1.0, 0.0, 0.0])
            dist = 1.0
        candidate = obj.position + d / dist * radius
        if not CAMERA_Z_MIN <= candidate[2] <= CAMERA_Z_MAX:
            dz = np.clip(p[2], CAMERA_Z_MIN, CAMERA_Z_MAX) - obj.position[2]
            horiz = math.sqrt(max(radius**2 - dz**2, 0.0))
            h = d[:2]
            hn = np.linalg.norm(h)
            if hn < 1e-12:
                h, hn = np.array([1.0, 0.0]), 1.0
            candidate = np.array(
                [
                    obj.position[0] + h[0] / hn * horiz,
                    obj.position[1] + h[1] / hn * horiz,
                    obj.position[2] + dz,
                ]
            )
        p = _clamp_box(candidate)
    return p


def apply_action(state: EnvState, a: Action) -> EnvState:
    """Step the environment: translate, rotate, clip, count.

    The new position is clamped to the workspace box (|x|,|y| <= 0.5 m,
    0.05 m <= z <= 0.6 m) and projected out of object proxy spheres. The
    rotation composes in the camera body frame.
    """
    if state.done:
        raise EpisodeFinished("episode already done")
    p = _clamp_box(state.camera.position + a.dpos)
    p = _project_out_of_spheres(p, state.scene)
    rot = state.camera.orientation @ Rotation.from_euler("xyz", a.drot).as_matrix()
    steps = state.step_count + 1
    return EnvState(state.scene, CameraPose(p, rot), steps, steps >= MAX_STEPS)


def goal_camera_pose(goal: GoalSpec, scene: SceneSpec) -> CameraPose:
    """World-frame camera pose implied by a goal and the true object state."""
    obj = scene.find(goal.target_category)
    vp = Viewpoint(obj.position, goal.range, goal.elevation, wrap_angle(goal.azimuth + obj.yaw))
    return viewpoint_to_camera_pose(vp)


def sample_goal(scene: SceneSpec, seed: int, target_category: int | None = None) -> GoalSpec:
    """Sample an object-centric goal viewpoint at the 0.4 m viewing radius.

    The target category is uniform among present objects unless pinned by
    ``target_category``; elevation is uniform in
    :data:`GOAL_ELEVATION_BOUNDS`; azimuth uniform. Goals whose implied
    camera pose exits the workspace box are rejected and resampled.
    """
    if not scene.objects:
        raise SceneError("empty scene")
    rng = np.random.default_rng(seed)
    if target_category is None:
        target = scene.objects[rng.integers(len(scene.objects))].category
    else:
        target = scene.find(target_category).category
    lo, hi = GOAL_ELEVATION_BOUNDS
    for _ in range(PLACEMENT_ATTEMPTS):
        goal = GoalSpec(
            target_category=target,
            range=GOAL_RANGE,
            elevation=float(rng.uniform(lo, hi)),
            azimuth=float(rng.uniform(-math.pi, math.pi)),
        )
        pos = goal_camera_pose(goal, scene).position
        if np.array_equal(pos, _clamp_box(pos)):
            return goal
    raise PlacementFailure("no in-bounds goal viewpoint found")


def check_success(camera: CameraPose, goal: GoalSpec, scene: SceneSpec) -> bool:
    """Strict success test: translation < 7.5 cm and rotation < 0.5 rad."""
    gp = goal_camera_pose(goal, scene)
    return (
        float(np.linalg.norm(camera.position - gp.position)) < SUCCESS_TRANS
        and rotation_error(camera, gp) < SUCCESS_ROT
    )


def symmetry_reduced(delta: float, symmetry_order: float) -> float:
    """Reduce an azimuth difference modulo the category's symmetry sector."""
    if math.isinf(symmetry_order):
        return 0.0
    sector = TAU / symmetry_order
    d = abs(float(wrap_angle(delta))) % sector
    return min(d, sector - d)


def object_centric_errors(
    camera: CameraPose, goal: GoalSpec, scene: SceneSpec, reduce_symmetry: bool = True
) -> tuple[float, float, float]:
    """Elevation, azimuth, and range error about the true target center.

    Returns (d_elevation, d_azimuth, d_range). The azimuth error is reduced
    modulo the category's symmetry sector unless ``reduce_symmetry`` is
    False (the benchmark reports the raw error, matching the headline
    tables where symmetric objects show the largest azimuth errors).
    """
    obj = scene.find(goal.target_category)
    d = camera.position - obj.position
    r = float(np.linalg.norm(d))
    if r == 0.0:
        return (abs(goal.elevation), 0.0, goal.range)
    elevation = math.asin(np.clip(d[2] / r, -1.0, 1.0))
    azimuth = math.atan2(d[1], d[0])
    d_elev = abs(elevation - goal.elevation)
    d_range = abs(r - goal.range)
    raw = azimuth - goal.azimuth - obj.yaw
    if reduce_symmetry:
        d_azim = symmetry_reduced(raw, category(obj.category).symmetry_order)
    else:
        d_azim = abs(float(wrap_angle(raw)))
    return (d_elev, d_azim, d_range)
