"""Action selection by expected-free-energy minimization.

A candidate next viewpoint is scored with four terms: look at the believed
target position, at the goal scale, from the goal direction, while gaining
information about object positions. 5000 candidates are importance-sampled
around the current position belief, the best is selected, and the camera
steps at most 5 cm toward it, replanning every 10 steps or on arrival.

Also hosts the baseline policies (greedy servoing with and without an
information-gain fallback, random, oracle) and free-energy diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from . import kernels
from .belief import (
    BeliefBank,
    N_BINS,
    ParticleBelief,
    bin_indices,
    maybe_resample,
    predict_jitter,
    update_detection,
    update_no_detection,
    update_yaw,
)
from .geometry import (
    CameraModel,
    CameraPose,
    Viewpoint,
    backproject,
    rotation_error,
    viewpoint_to_camera_pose,
    wrap_angle,
)
from .perception import (
    Detection,
    NoiseConfig,
    ObservationBundle,
    distance_from_scale,
    scale_from_distance,
)
from .scene import (
    ACTION_BOUND,
    CAMERA_Z_MAX,
    CAMERA_Z_MIN,
    TABLE_HALF,
    Action,
    EnvState,
    GoalSpec,
    category,
    goal_camera_pose,
)

LOG_EPS = 1e-12
TWO_PI = 2.0 * math.pi


class PlanningError(ValueError):
    pass


class PlacementFailure(PlanningError):
    """Candidate rejection sampling ran out of budget."""


@dataclass(frozen=True)
class EfeBreakdown:
    """The four scoring terms of one candidate viewpoint and their total G."""

    position_utility: float
    scale_utility: float
    pose_utility: float
    info_gain: float
    total: float

    def to_json(self) -> dict:
        return {
            "position_utility": self.position_utility,
            "scale_utility": self.scale_utility,
            "pose_utility": self.pose_utility,
            "info_gain": self.info_gain,
            "total": self.total,
        }


@dataclass(frozen=True)
class PlannerConfig:
    num_candidates: int = 5000
    replan_interval: int = 10
    step_size: float = 0.05
    importance_mix: float = 0.7  # probability of drawing a look-at from the belief
    w_position: float = 1.0
    w_scale: float = 1.0
    w_pose: float = 1.0
    w_info: float = 1.0
    utility_enabled: bool = True
    range_bounds: tuple = (0.25, 0.65)
    elevation_bounds: tuple = (0.15, 1.40)
    scale_util_std: float = 0.1
    pose_util_std: float = 0.2
    scale_util_samples: int = 64
    scoring_subsample: int = 256  # 0 = score on the full particle set

    def __post_init__(self):
        if self.num_candidates < 1:
            raise PlanningError("num_candidates must be >= 1")
        if not 0.0 <= self.importance_mix <= 1.0:
            raise PlanningError("importance_mix out of [0,1]")
        if self.step_size <= 0.0:
            raise PlanningError("step_size must be > 0")

    def to_json(self) -> dict:
        return {
            "num_candidates": self.num_candidates,
            "replan_interval": self.replan_interval,
            "step_size": self.step_size,
            "importance_mix": self.importance_mix,
            "w_position": self.w_position,
            "w_scale": self.w_scale,
            "w_pose": self.w_pose,
            "w_info": self.w_info,
            "utility_enabled": self.utility_enabled,
            "range_bounds": list(self.range_bounds),
            "elevation_bounds": list(self.elevation_bounds),
            "scale_util_std": self.scale_util_std,
            "pose_util_std": self.pose_util_std,
            "scale_util_samples": self.scale_util_samples,
            "scoring_subsample": self.scoring_subsample,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PlannerConfig":
        doc = dict(doc)
        for key in ("range_bounds", "elevation_bounds"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)


@dataclass(frozen=True)
class GoalBeliefs:
    """Goal factors inferred from the goal specification.

    ``sigma_goal`` is the apparent scale at the goal range; the pose goal is
    the object-frame view direction the goal observation was taken from.
    """

    target_category: int
    sigma_goal: float
    pose_azimuth: float
    pose_elevation: float

    def __post_init__(self):
        if self.sigma_goal <= 0.0:
            raise PlanningError("sigma_goal must be > 0")

    @classmethod
    def from_goal(cls, goal: GoalSpec) -> "GoalBeliefs":
        return cls(
            target_category=goal.target_category,
            sigma_goal=scale_from_distance(goal.range),
            pose_azimuth=goal.azimuth,
            pose_elevation=goal.elevation,
        )


@dataclass
class CandidateSet:
    """Vectorized batch of candidate viewpoints and their camera poses."""

    lookats: np.ndarray  # (C, 3)
    ranges: np.ndarray  # (C,)
    elevations: np.ndarray  # (C,)
    azimuths: np.ndarray  # (C,)
    positions: np.ndarray  # (C, 3)
    rotations: np.ndarray  # (C, 3, 3)

    def __len__(self) -> int:
        return self.lookats.shape[0]

    def viewpoint(self, i: int) -> Viewpoint:
        return Viewpoint(
            self.lookats[i], float(self.ranges[i]), float(self.elevations[i]), float(self.azimuths[i])
        )


def _lookat_rotations(forward: np.ndarray) -> np.ndarray:
    """Vectorized look-at rotation (camera -z = forward, up toward +z)."""
    f = forward / np.linalg.norm(forward, axis=1, keepdims=True)
    x = np.stack([f[:, 1], -f[:, 0], np.zeros(len(f))], axis=1)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = np.cross(x, f)
    return np.stack([x, y, -f], axis=2)


def _camera_positions(lookats, ranges, elevations, azimuths):
    ce = np.cos(elevations)
    offsets = np.stack(
        [ce * np.cos(azimuths), ce * np.sin(azimuths), np.sin(elevations)], axis=1
    ) * ranges[:, None]
    return lookats + offsets


def build_candidate_set(lookats, ranges, elevations, azimuths) -> CandidateSet:
    lookats = np.atleast_2d(np.asarray(lookats, dtype=float))
    ranges = np.asarray(ranges, dtype=float)
    elevations = np.asarray(elevations, dtype=float)
    azimuths = np.asarray(azimuths, dtype=float)
    positions = _camera_positions(lookats, ranges, elevations, azimuths)
    rotations = _lookat_rotations(lookats - positions)
    return CandidateSet(lookats, ranges, elevations, azimuths, positions, rotations)


def candidate_set_for(v: Viewpoint) -> CandidateSet:
    return build_candidate_set(
        v.lookat[None, :], np.array([v.range]), np.array([v.elevation]), np.array([v.azimuth])
    )


def _in_workspace(positions: np.ndarray) -> np.ndarray:
    return (
        (np.abs(positions[:, 0]) <= TABLE_HALF)
        & (np.abs(positions[:, 1]) <= TABLE_HALF)
        & (positions[:, 2] >= CAMERA_Z_MIN)
        & (positions[:, 2] <= CAMERA_Z_MAX)
    )


def sample_candidates(
    bank: BeliefBank,
    goal: GoalBeliefs | None,
    cfg: PlannerConfig,
    rng: np.random.Generator,
) -> CandidateSet:
    """Importance-sample candidate viewpoints around the position belief.

    Look-at points come from the target's particle belief with probability
    ``importance_mix`` and uniformly from the table plane otherwise; range,
    elevation, and azimuth are uniform in their bounds. Candidates whose
    camera position leaves the workspace are rejected and redrawn. In
    goal-free mode the look-at mixture spans every category's belief.
    """
    wanted = cfg.num_candidates
    budget = 10 * wanted
    drawn = 0
    chunks: list[CandidateSet] = []
    collected = 0
    if goal is not None:
        source_beliefs = [bank.position[goal.target_category]]
    else:
        source_beliefs = [bank.position[c] for c in bank.categories()]

    while collected < wanted:
        if drawn >= budget:
            raise PlacementFailure("candidate sampling budget exhausted")
        n = min(wanted - collected + 256, budget - drawn)
        drawn += n
        lookats = np.empty((n, 3))
        from_belief = rng.uniform(size=n) < cfg.importance_mix
        n_belief = int(from_belief.sum())
        if n_belief:
            src = rng.integers(len(source_beliefs), size=n_belief)
            picks = np.empty((n_belief, 3))
            for s, b in enumerate(source_beliefs):
                sel = src == s
                if sel.any():
                    idx = rng.choice(b.num_particles, size=int(sel.sum()), p=b.weights)
                    picks[sel] = b.positions[idx]
            lookats[from_belief] = picks
        n_uniform = n - n_belief
        if n_uniform:
            xy = rng.uniform(-TABLE_HALF, TABLE_HALF, size=(n_uniform, 2))
            lookats[~from_belief] = np.column_stack([xy, np.zeros(n_uniform)])
        ranges = rng.uniform(*cfg.range_bounds, size=n)
        elevations = rng.uniform(*cfg.elevation_bounds, size=n)
        azimuths = rng.uniform(-math.pi, math.pi, size=n)
        positions = _camera_positions(lookats, ranges, elevations, azimuths)
        keep = _in_workspace(positions)
        take = min(int(keep.sum()), wanted - collected)
        if take == 0:
            continue
        idx = np.flatnonzero(keep)[:take]
        chunks.append(
            CandidateSet(
                lookats[idx],
                ranges[idx],
                elevations[idx],
                azimuths[idx],
                positions[idx],
                _lookat_rotations(lookats[idx] - positions[idx]),
            )
        )
        collected += take

    return CandidateSet(
        np.concatenate([c.lookats for c in chunks]),
        np.concatenate([c.ranges for c in chunks]),
        np.concatenate([c.elevations for c in chunks]),
        np.concatenate([c.azimuths for c in chunks]),
        np.concatenate([c.positions for c in chunks]),
        np.concatenate([c.rotations for c in chunks]),
    )


def _info_gain_for_candidates(
    b: ParticleBelief, cands: CandidateSet, model: CameraModel, noise: NoiseConfig
) -> np.ndarray:
    return kernels.frustum_info_gain(
        cands.positions,
        cands.rotations,
        b.positions,
        b.weights,
        bin_indices(b.positions),
        N_BINS,
        model.focal_pixels,
        model.cx,
        model.cy,
        float(model.image_width),
        float(model.image_height),
        1e-6,
        noise.true_positive_rate,
        noise.false_positive_rate,
    )


def info_gain(
    b: ParticleBelief, v: Viewpoint, model: CameraModel, noise: NoiseConfig
) -> float:
    """Mutual information between the binary detection event at ``v`` and
    the object position, in nats.

    Particles inside the frustum are detected with the true-positive rate,
    others with the false-positive rate; position entropies use the fixed
    histogram grid.
    """
    return float(_info_gain_for_candidates(b, candidate_set_for(v), model, noise)[0])


def _scoring_belief(b: ParticleBelief, cfg: PlannerConfig, rng: np.random.Generator):
    """Equal-weight compression of the belief used for candidate scoring."""
    if cfg.scoring_subsample and b.num_particles > cfg.scoring_subsample:
        n = cfg.scoring_subsample
        starts = rng.uniform() / n + np.arange(n) / n
        cum = np.cumsum(b.weights)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, starts)
        return ParticleBelief(b.positions[idx], np.full(n, 1.0 / n))
    return b


def _wrapped_gaussian_logpdf(delta: np.ndarray, std: float) -> np.ndarray:
    """Log-density of a wrapped normal, adequate for std well below pi."""
    d = wrap_angle(delta)
    return -0.5 * (d / std) ** 2 - math.log(std * math.sqrt(TWO_PI))


def _pose_utility(
    cands: CandidateSet,
    believed_position: np.ndarray,
    yaw_mean: float,
    yaw_informative: bool,
    symmetry_order: float,
    goal: GoalBeliefs,
    cfg: PlannerConfig,
) -> np.ndarray:
    d = cands.positions - believed_position
    r = np.linalg.norm(d, axis=1)
    r = np.maximum(r, 1e-9)
    elev = np.arcsin(np.clip(d[:, 2] / r, -1.0, 1.0))
    out = _wrapped_gaussian_logpdf(elev - goal.pose_elevation, cfg.pose_util_std)
    if math.isinf(symmetry_order) or not yaw_informative:
        return out - math.log(TWO_PI)
    azim_rel = np.arctan2(d[:, 1], d[:, 0]) - yaw_mean
    delta = wrap_angle(azim_rel - goal.pose_azimuth)
    sector = TWO_PI / symmetry_order
    folded = np.abs(delta) % sector
    folded = np.minimum(folded, sector - folded)
    return out + _wrapped_gaussian_logpdf(folded, cfg.pose_util_std)


def score_candidates(
    bank: BeliefBank,
    cands: CandidateSet,
    goal: GoalBeliefs | None,
    cfg: PlannerConfig,
    model: CameraModel,
    noise: NoiseConfig,
    rng: np.random.Generator | None = None,
) -> dict:
    """Score every candidate; returns arrays for the four terms and G.

    With ``goal=None`` (goal-free exploration) the utilities are zeroed and
    the information gain sums over every category's belief.
    """
    rng = rng or np.random.default_rng(0)
    n = len(cands)
    zeros = np.zeros(n)

    if goal is None or not cfg.utility_enabled:
        ig = np.zeros(n)
        cats = [goal.target_category] if goal is not None else bank.categories()
        for cat in cats:
            ig += _info_gain_for_candidates(
                _scoring_belief(bank.position[cat], cfg, rng), cands, model, noise
            )
        total = -cfg.w_info * ig
        return {
            "position_utility": zeros,
            "scale_utility": zeros,
            "pose_utility": zeros,
            "info_gain": ig,
            "total": total,
        }

    target = goal.target_category
    b = _scoring_belief(bank.position[target], cfg, rng)

    pos_util = np.log(
        kernels.kde_batch(cands.lookats, b.positions, b.weights, 0.05) + LOG_EPS
    )

    m = min(cfg.scale_util_samples, b.num_particles)
    sub = b.positions[rng.choice(b.num_particles, size=m, p=b.weights)]
    dists = np.linalg.norm(cands.positions[:, None, :] - sub[None, :, :], axis=2)
    scales = 0.4 / np.maximum(dists, 1e-6)
    scale_logpdf = (
        -0.5 * ((scales - goal.sigma_goal) / cfg.scale_util_std) ** 2
        - math.log(cfg.scale_util_std * math.sqrt(TWO_PI))
    )
    scale_util = scale_logpdf.mean(axis=1)

    yb = bank.yaw[target]
    pose_util = _pose_utility(
        cands,
        b.mean(),
        yb.mean,
        yb.informative,
        category(target).symmetry_order,
        goal,
        cfg,
    )

    ig = _info_gain_for_candidates(b, cands, model, noise)

    total = (
        -(cfg.w_position * pos_util + cfg.w_scale * scale_util + cfg.w_pose * pose_util)
        - cfg.w_info * ig
    )
    return {
        "position_utility": pos_util,
        "scale_utility": scale_util,
        "pose_utility": pose_util,
        "info_gain": ig,
        "total": total,
    }


def score_efe(
    bank: BeliefBank,
    v: Viewpoint,
    goal: GoalBeliefs | None,
    cfg: PlannerConfig,
    model: CameraModel,
    noise: NoiseConfig,
) -> EfeBreakdown:
    """Expected-free-energy breakdown of a single candidate viewpoint.

    Always evaluated on the full particle set (no scoring subsample).
    """
    full = replace(cfg, scoring_subsample=0)
    terms = score_candidates(bank, candidate_set_for(v), goal, full, model, noise)
    return EfeBreakdown(
        float(terms["position_utility"][0]),
        float(terms["scale_utility"][0]),
        float(terms["pose_utility"][0]),
        float(terms["info_gain"][0]),
        float(terms["total"][0]),
    )


def select_target_viewpoint(
    bank: BeliefBank,
    goal: GoalBeliefs | None,
    cfg: PlannerConfig,
    model: CameraModel,
    noise: NoiseConfig,
    rng: np.random.Generator,
    extra_candidates: CandidateSet | None = None,
) -> tuple[Viewpoint, EfeBreakdown]:
    """Sample candidates and return the G-minimizing viewpoint.

    Ties break toward the earliest candidate in sample order, so the
    selection is deterministic given the generator state.
    """
    cands = sample_candidates(bank, goal, cfg, rng)
    if extra_candidates is not None:
        cands = CandidateSet(
            np.concatenate([cands.lookats, extra_candidates.lookats]),
            np.concatenate([cands.ranges, extra_candidates.ranges]),
            np.concatenate([cands.elevations, extra_candidates.elevations]),
            np.concatenate([cands.azimuths, extra_candidates.azimuths]),
            np.concatenate([cands.positions, extra_candidates.positions]),
            np.concatenate([cands.rotations, extra_candidates.rotations]),
        )
    terms = score_candidates(bank, cands, goal, cfg, model, noise, rng)
    best = int(np.argmin(terms["total"]))
    breakdown = EfeBreakdown(
        float(terms["position_utility"][best]),
        float(terms["scale_utility"][best]),
        float(terms["pose_utility"][best]),
        float(terms["info_gain"][best]),
        float(terms["total"][best]),
    )
    return cands.viewpoint(best), breakdown


def step_toward(current: CameraPose, target: Viewpoint, cfg: PlannerConfig) -> Action:
    """One bounded step along the straight line to the target camera pose.

    Translation is capped at ``step_size``; rotation interpolates toward
    the target orientation with every Euler component inside the action
    bounds. Within one step of the target the action lands exactly on it.
    """
    target_pose = viewpoint_to_camera_pose(target)
    delta = target_pose.position - current.position
    dist = float(np.linalg.norm(delta))
    dpos = delta if dist <= cfg.step_size else delta * (cfg.step_size / dist)

    rel = Rotation.from_matrix(current.orientation.T @ target_pose.orientation)
    frac = 1.0
    for _ in range(32):
        drot = Rotation.from_rotvec(rel.as_rotvec() * frac).as_euler("xyz")
        if np.max(np.abs(drot)) <= ACTION_BOUND + 1e-12:
            break
        frac *= 0.8
    return Action(dpos, drot)


def _pose_reached(current: CameraPose, target: Viewpoint, tol: float = 1e-6) -> bool:
    tp = viewpoint_to_camera_pose(target)
    return (
        float(np.linalg.norm(current.position - tp.position)) <= tol
        and rotation_error(current, tp) <= tol
    )


def update_bank(
    bank: BeliefBank,
    obs: ObservationBundle,
    model: CameraModel,
    rng: np.random.Generator,
    jitter_std: float = 0.025,
) -> None:
    """Fold one observation into every category's beliefs, in place.

    Detected categories get a ray-Gaussian reweighting plus a yaw update;
    undetected ones get negative evidence, gated by the distance to the
    current estimate once the object has been seen. Each belief is then
    jittered and conditionally resampled.
    """
    cats = bank.categories()
    undetected = [cat for cat in cats if obs.detections.get(cat) is None]
    frustum: dict[int, np.ndarray] = {}
    if undetected:
        stacked = np.concatenate([bank.position[cat].positions for cat in undetected])
        flat = kernels.frustum_masks(
            obs.camera.position[None],
            obs.camera.orientation[None],
            stacked,
            model.focal_pixels,
            model.cx,
            model.cy,
            float(model.image_width),
            float(model.image_height),
            1e-6,
        )[0].astype(bool)
        offset = 0
        for cat in undetected:
            n = bank.position[cat].num_particles
            frustum[cat] = flat[offset : offset + n]
            offset += n
    if jitter_std > 0.0:
        noise = rng.normal(
            0.0, jitter_std, size=(len(cats),) + bank.position[cats[0]].positions.shape
        )
    for i, cat in enumerate(cats):
        b = bank.position[cat]
        det = obs.detections.get(cat)
        if det is not None:
            b = update_detection(b, det, obs.camera, model)
            bank.observed[cat] = True
            bank.yaw[cat] = update_yaw(bank.yaw[cat], det, obs.camera, b.mean())
        else:
            if bank.observed[cat]:
                depth = float(np.linalg.norm(b.mean() - obs.camera.position))
            else:
                depth = math.inf
            b = update_no_detection(b, obs.camera, model, depth, in_frustum=frustum[cat])
        if jitter_std > 0.0:
            b = predict_jitter(b, rng, jitter_std, noise=noise[i])
        bank.position[cat] = maybe_resample(b, rng)


class AifAgent:
    """Expected-free-energy agent: belief bank plus cached target viewpoint."""

    name = "aif"

    def __init__(
        self,
        goal: GoalSpec | None,
        cfg: PlannerConfig,
        model: CameraModel,
        noise: NoiseConfig,
        rng: np.random.Generator,
        num_particles: int = 10_000,
        jitter_std: float = 0.025,
    ):
        self.goal = GoalBeliefs.from_goal(goal) if goal is not None else None
        self.cfg = cfg
        self.model = model
        self.noise = noise
        self.rng = rng
        self.jitter_std = jitter_std
        self.bank = BeliefBank.create(rng, n=num_particles)
        self.target: Viewpoint | None = None
        self.last_breakdown: EfeBreakdown | None = None
        self._steps_since_plan = 0

    def act(self, state: EnvState, obs: ObservationBundle) -> Action:
        update_bank(self.bank, obs, self.model, self.rng, self.jitter_std)
        needs_plan = (
            self.target is None
            or self._steps_since_plan >= self.cfg.replan_interval
            or _pose_reached(state.camera, self.target)
        )
        if needs_plan:
            self.target, self.last_breakdown = select_target_viewpoint(
                self.bank, self.goal, self.cfg, self.model, self.noise, self.rng
            )
            self._steps_since_plan = 0
        self._steps_since_plan += 1
        return step_toward(state.camera, self.target, self.cfg)


def _estimate_from_detection(
    det: Detection, camera: CameraPose, model: CameraModel
) -> tuple[np.ndarray, float]:
    """Single-frame object position and yaw implied by one detection."""
    pixel = np.clip(
        det.pixel_center,
        [0.0, 0.0],
        [np.nextafter(model.image_width, 0.0), np.nextafter(model.image_height, 0.0)],
    )
    ray = backproject(camera, model, pixel)
    position = ray.point_at(distance_from_scale(det.scale))
    d = camera.position - position
    yaw = wrap_angle(math.atan2(d[1], d[0]) - det.azimuth_rel)
    return position, float(yaw)


class GreedyAgent:
    """Relative-pose servo baseline.

    When the target is detected, the goal camera pose is recomputed from
    the single-frame estimate and the agent steps 5 cm toward it. When it
    is not, the vanilla variant stops; the infogain variant shares the
    particle filter machinery and steps toward the viewpoint with the
    highest expected information gain over the target position.
    """

    def __init__(
        self,
        goal: GoalSpec,
        cfg: PlannerConfig,
        model: CameraModel,
        noise: NoiseConfig,
        rng: np.random.Generator,
        variant: str = "vanilla",
        num_particles: int = 10_000,
        jitter_std: float = 0.025,
    ):
        if variant not in ("vanilla", "infogain"):
            raise PlanningError(f"unknown greedy variant {variant!r}")
        self.goal = goal
        self.goal_beliefs = GoalBeliefs.from_goal(goal)
        self.cfg = replace(cfg, utility_enabled=False)
        self.model = model
        self.noise = noise
        self.rng = rng
        self.variant = variant
        self.jitter_std = jitter_std
        self.name = "greedy" if variant == "vanilla" else "greedy-infogain"
        if variant == "infogain":
            self.bank = BeliefBank.create(rng, categories=(category(goal.target_category),), n=num_particles)
        else:
            self.bank = None
        self.target: Viewpoint | None = None
        self._steps_since_plan = 0

    def act(self, state: EnvState, obs: ObservationBundle) -> Action:
        if self.bank is not None:
            update_bank(self.bank, obs, self.model, self.rng, self.jitter_std)
        det = obs.detections.get(self.goal.target_category)
        if det is not None:
            position, yaw = _estimate_from_detection(det, state.camera, self.model)
            vp = Viewpoint(
                position,
                self.goal.range,
                self.goal.elevation,
                wrap_angle(self.goal.azimuth + yaw),
            )
            self.target = None
            return step_toward(state.camera, vp, self.cfg)
        if self.variant == "vanilla":
            return Action.zero()
        needs_plan = (
            self.target is None
            or self._steps_since_plan >= self.cfg.replan_interval
            or _pose_reached(state.camera, self.target)
        )
        if needs_plan:
            self.target, _ = select_target_viewpoint(
                self.bank, self.goal_beliefs, self.cfg, self.model, self.noise, self.rng
            )
            self._steps_since_plan = 0
        self._steps_since_plan += 1
        return step_toward(state.camera, self.target, self.cfg)


class RandomAgent:
    """Uniform actions over the clipped 6-DOF action box."""

    name = "random"

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def act(self, state: EnvState, obs: ObservationBundle) -> Action:
        return Action(
            self.rng.uniform(-ACTION_BOUND, ACTION_BOUND, size=3),
            self.rng.uniform(-ACTION_BOUND, ACTION_BOUND, size=3),
        )


class OracleAgent:
    """Ground-truth straight-line walker; harness self-test upper bound."""

    name = "oracle"

    def __init__(self, goal: GoalSpec, scene, cfg: PlannerConfig):
        pose = goal_camera_pose(goal, scene)
        obj = scene.find(goal.target_category)
        self.target = Viewpoint(
            obj.position,
            goal.range,
            goal.elevation,
            wrap_angle(goal.azimuth + obj.yaw),
        )
        self.cfg = cfg
        self.pose = pose

    def act(self, state: EnvState, obs: ObservationBundle) -> Action:
        return step_toward(state.camera, self.target, self.cfg)


@dataclass
class FreeEnergyTrace:
    """Per-step belief-update diagnostics.

    ``position_kl`` is the KL divergence from prior to posterior over the
    histogram bins summed across categories; ``detection_nll`` the negative
    log prior-predictive likelihood of each accepted detection; ``entropy``
    the per-category histogram entropies.
    """

    position_kl: list = field(default_factory=list)
    detection_nll: list = field(default_factory=list)
    entropy: list = field(default_factory=list)


def kl_histogram(posterior: ParticleBelief, prior: ParticleBelief) -> float:
    """KL(posterior || prior) on the shared histogram grid, in nats."""
    post = np.bincount(bin_indices(posterior.positions), weights=posterior.weights, minlength=N_BINS)
    pri = np.bincount(bin_indices(prior.positions), weights=prior.weights, minlength=N_BINS)
    nz = post > 0.0
    return float(np.sum(post[nz] * np.log(post[nz] / np.maximum(pri[nz], LOG_EPS))))


def detection_nll(prior: ParticleBelief, rl) -> float:
    """Negative log prior-predictive likelihood of a detection's ray model."""
    like = np.exp(rl.log_density(prior.positions))
    return float(-np.log(max(float(prior.weights @ like), LOG_EPS)))
