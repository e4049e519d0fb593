"""Particle-filter beliefs over allocentric object positions.

Positive updates reweight particles with a ray-aligned Gaussian built from
a detection's pixel center and scale-implied depth; negative updates drive
in-view particle weights to a fixed small value before renormalizing.
Yaw beliefs are circular running means fed by relative-pose estimates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import CameraModel, CameraPose, Ray, backproject, frustum_mask
from .perception import Detection, distance_from_scale
from .scene import CATEGORIES, category

logger = logging.getLogger(__name__)

# Particles live in this box: the tabletop footprint plus the band of
# plausible object-center heights.
PARTICLE_BOUNDS = np.array([[-0.5, 0.5], [-0.5, 0.5], [0.0, 0.2]])

# Fixed histogram used by every entropy estimate in the package.
GRID_SHAPE = (20, 20, 10)
N_BINS = int(np.prod(GRID_SHAPE))

DEFAULT_NUM_PARTICLES = 10_000

# Negative evidence: in-view weights are set to this absolute value before
# renormalization.
NO_DETECTION_WEIGHT = 1e-5

# Ray-likelihood covariance (m^2): elongated along the viewing ray.
VARIANCE_DEPTH = 0.1973 / 2.0
VARIANCE_LATERAL = 0.02

DEFAULT_JITTER_STD = 0.025
KDE_BANDWIDTH = 0.05


def bin_indices(positions: np.ndarray) -> np.ndarray:
    """Flat histogram-bin index of each position on the fixed grid."""
    positions = np.atleast_2d(positions)
    idx = np.empty((positions.shape[0], 3), dtype=np.int64)
    for axis in range(3):
        lo, hi = PARTICLE_BOUNDS[axis]
        scaled = (positions[:, axis] - lo) / (hi - lo) * GRID_SHAPE[axis]
        idx[:, axis] = np.clip(scaled.astype(np.int64), 0, GRID_SHAPE[axis] - 1)
    return np.ravel_multi_index((idx[:, 0], idx[:, 1], idx[:, 2]), GRID_SHAPE)


@dataclass(frozen=True)
class ParticleBelief:
    """Weighted particle approximation of one object's position posterior."""

    positions: np.ndarray
    weights: np.ndarray
    degenerate: bool = False  # set when an update fell back to uniform

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.positions.shape != (self.weights.shape[0], 3):
            raise ValueError("positions must be (N, 3) matching weights")
        if np.any(self.weights < 0.0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")

    @property
    def num_particles(self) -> int:
        return self.weights.shape[0]

    def mean(self) -> np.ndarray:
        # positions/weights are never mutated, so the mean is cached
        cached = getattr(self, "_mean", None)
        if cached is None:
            cached = self.weights @ self.positions
            object.__setattr__(self, "_mean", cached)
        return cached

    def covariance(self) -> np.ndarray:
        d = self.positions - self.mean()
        return (d * self.weights[:, None]).T @ d

    def ess(self) -> float:
        return 1.0 / float(np.sum(self.weights**2))


def init_uniform(
    bounds=PARTICLE_BOUNDS, n: int = DEFAULT_NUM_PARTICLES, rng: np.random.Generator | None = None
) -> ParticleBelief:
    """Equal-weight particles i.i.d. uniform over the workspace box."""
    if n < 1:
        raise ValueError("need at least one particle")
    rng = rng or np.random.default_rng()
    bounds = np.asarray(bounds, dtype=float)
    positions = rng.uniform(bounds[:, 0], bounds[:, 1], size=(n, 3))
    return ParticleBelief(positions, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class RayLikelihood:
    """Gaussian ellipsoid along a backprojected ray at an estimated depth."""

    ray: Ray
    depth_mean: float
    variance_depth: float = VARIANCE_DEPTH
    variance_lateral: float = VARIANCE_LATERAL

    def __post_init__(self):
        if self.variance_depth <= 0.0 or self.variance_lateral <= 0.0:
            raise ValueError("variances must be > 0")

    @property
    def mean_point(self) -> np.ndarray:
        return self.ray.point_at(self.depth_mean)

    def log_density(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        d = points - self.mean_point
        along = d @ self.ray.direction
        lat_sq = np.maximum(np.sum(d * d, axis=1) - along**2, 0.0)
        log_norm = -0.5 * (
            3.0 * math.log(2.0 * math.pi)
            + math.log(self.variance_depth)
            + 2.0 * math.log(self.variance_lateral)
        )
        return log_norm - 0.5 * (along**2 / self.variance_depth + lat_sq / self.variance_lateral)


def detection_likelihood(rl: RayLikelihood, p) -> float:
    """Density of the ray-Gaussian at a single world point."""
    return float(np.exp(rl.log_density(np.asarray(p, dtype=float)))[0])


def ray_likelihood_from_detection(
    d: Detection, camera: CameraPose, model: CameraModel
) -> RayLikelihood:
    pixel = np.clip(
        d.pixel_center,
        [0.0, 0.0],
        [np.nextafter(model.image_width, 0.0), np.nextafter(model.image_height, 0.0)],
    )
    return RayLikelihood(backproject(camera, model, pixel), distance_from_scale(d.scale))


def update_detection(
    b: ParticleBelief, d: Detection, camera: CameraPose, model: CameraModel
) -> ParticleBelief:
    """Bayes reweighting by the detection's ray-Gaussian likelihood.

    If every likelihood underflows to zero the update degenerates to a
    uniform reweighting and the returned belief is flagged.
    """
    rl = ray_likelihood_from_detection(d, camera, model)
    like = np.exp(rl.log_density(b.positions))
    w = b.weights * like
    total = w.sum()
    if total <= 0.0 or not np.isfinite(total):
        logger.warning("degenerate detection update for category %d", d.category)
        n = b.num_particles
        return ParticleBelief(b.positions, np.full(n, 1.0 / n), degenerate=True)
    return ParticleBelief(b.positions, w / total)


def update_no_detection(
    b: ParticleBelief,
    camera: CameraPose,
    model: CameraModel,
    nearest_estimated_depth: float = math.inf,
    in_frustum: np.ndarray | None = None,
) -> ParticleBelief:
    """Negative evidence: down-weight particles the camera should have seen.

    Every particle inside the frustum and nearer than
    ``nearest_estimated_depth`` has its weight set to the absolute value
    :data:`NO_DETECTION_WEIGHT` before renormalization. ``in_frustum``
    accepts a precomputed frustum mask so callers updating several beliefs
    against one camera can batch the visibility test.
    """
    if in_frustum is None:
        mask = frustum_mask(camera, model, b.positions)
    else:
        mask = np.array(in_frustum, dtype=bool)
    if nearest_estimated_depth != math.inf:
        dist = np.linalg.norm(b.positions - camera.position, axis=1)
        mask &= dist < nearest_estimated_depth
    if not mask.any():
        return b
    w = b.weights.copy()
    w[mask] = NO_DETECTION_WEIGHT
    total = w.sum()
    if total <= 0.0:
        logger.warning("degenerate no-detection update")
        n = b.num_particles
        return ParticleBelief(b.positions, np.full(n, 1.0 / n), degenerate=True)
    return ParticleBelief(b.positions, w / total)


def predict_jitter(
    b: ParticleBelief,
    rng: np.random.Generator,
    jitter_std: float = DEFAULT_JITTER_STD,
    noise: np.ndarray | None = None,
) -> ParticleBelief:
    """Diffuse particles with isotropic Gaussian noise, clamped to bounds.

    ``noise`` accepts a pre-drawn displacement array so callers jittering
    several beliefs can batch the random draw.
    """
    if jitter_std == 0.0:
        return b
    if noise is None:
        noise = rng.normal(0.0, jitter_std, size=b.positions.shape)
    moved = b.positions + noise
    moved = np.clip(moved, PARTICLE_BOUNDS[:, 0], PARTICLE_BOUNDS[:, 1])
    return ParticleBelief(moved, b.weights, b.degenerate)


def resample_systematic(b: ParticleBelief, rng: np.random.Generator) -> ParticleBelief:
    """Systematic (low-variance) resampling to N equal-weight particles."""
    n = b.num_particles
    positions = rng.uniform() / n + np.arange(n) / n
    cumulative = np.cumsum(b.weights)
    cumulative[-1] = 1.0
    idx = np.searchsorted(cumulative, positions)
    return ParticleBelief(b.positions[idx], np.full(n, 1.0 / n))


def maybe_resample(b: ParticleBelief, rng: np.random.Generator) -> ParticleBelief:
    """Resample when the effective sample size drops below N/2."""
    if b.ess() < b.num_particles / 2.0:
        return resample_systematic(b, rng)
    return b


def entropy(b: ParticleBelief) -> float:
    """Shannon entropy (nats) of the weights on the fixed histogram grid."""
    bins = np.bincount(bin_indices(b.positions), weights=b.weights, minlength=N_BINS)
    nz = bins[bins > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def density_at(b: ParticleBelief, p, bandwidth: float = KDE_BANDWIDTH) -> float:
    """Gaussian-kernel density estimate of the belief at a world point."""
    q = np.atleast_2d(np.asarray(p, dtype=float))
    return float(kernels.kde_batch(q, b.positions, b.weights, bandwidth)[0])


def density_at_batch(b: ParticleBelief, points, bandwidth: float = KDE_BANDWIDTH) -> np.ndarray:
    return kernels.kde_batch(np.atleast_2d(points), b.positions, b.weights, bandwidth)


@dataclass(frozen=True)
class YawBelief:
    """Circular running estimate of an object's yaw.

    ``cos_sum``/``sin_sum`` accumulate unit phasors of yaw samples; the
    dispersion is the circular standard deviation of the resultant.
    """

    cos_sum: float = 0.0
    sin_sum: float = 0.0
    count: int = 0

    @property
    def mean(self) -> float:
        if self.count == 0:
            return 0.0
        return math.atan2(self.sin_sum, self.cos_sum)

    @property
    def resultant_length(self) -> float:
        if self.count == 0:
            return 0.0
        return min(math.hypot(self.cos_sum, self.sin_sum) / self.count, 1.0)

    @property
    def dispersion(self) -> float:
        """Circular std in radians; pi when no information is available."""
        r = self.resultant_length
        if r <= 0.0:
            return math.pi
        return min(math.sqrt(-2.0 * math.log(max(r, 1e-12))), math.pi)

    @property
    def informative(self) -> bool:
        return self.count > 0


def update_yaw(
    yb: YawBelief, d: Detection, camera: CameraPose, believed_position
) -> YawBelief:
    """Fold one detection's relative-pose azimuth into the yaw belief.

    The implied yaw sample is the camera's azimuth about the believed
    object position minus the detected relative azimuth. Categories with
    full rotational symmetry carry no azimuth information and leave the
    belief untouched.
    """
    if math.isinf(category(d.category).symmetry_order):
        return yb
    believed_position = np.asarray(believed_position, dtype=float)
    delta = camera.position - believed_position
    cam_azimuth = math.atan2(delta[1], delta[0])
    yaw_sample = cam_azimuth - d.azimuth_rel
    return YawBelief(
        yb.cos_sum + math.cos(yaw_sample),
        yb.sin_sum + math.sin(yaw_sample),
        yb.count + 1,
    )


@dataclass
class BeliefBank:
    """Per-category particle and yaw beliefs owned by one episode."""

    position: dict  # category id -> ParticleBelief
    yaw: dict  # category id -> YawBelief
    observed: dict  # category id -> bool (ever positively detected)

    @classmethod
    def create(
        cls,
        rng: np.random.Generator,
        categories=CATEGORIES,
        n: int = DEFAULT_NUM_PARTICLES,
    ) -> "BeliefBank":
        return cls(
            position={c.id: init_uniform(n=n, rng=rng) for c in categories},
            yaw={c.id: YawBelief() for c in categories},
            observed={c.id: False for c in categories},
        )

    def categories(self):
        return sorted(self.position)
