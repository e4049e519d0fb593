"""Benchmark harness: suites, episodes, aggregation, trace export.

A suite is a JSON array of ``{scene, goal, seed}`` records. Episodes are
fully isolated: every per-episode random stream derives from the master
seed and the record index, so results do not depend on worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from .belief import entropy as belief_entropy
from .geometry import CameraModel
from .perception import NoiseConfig, observe
from .planning import (
    AifAgent,
    GreedyAgent,
    OracleAgent,
    PlannerConfig,
    RandomAgent,
    kl_histogram,
)
from .scene import (
    CATEGORIES,
    GoalSpec,
    SceneSpec,
    apply_action,
    category,
    check_success,
    generate_scene,
    initial_state,
    object_centric_errors,
    sample_goal,
)

AGENT_NAMES = ("aif", "greedy", "greedy-infogain", "random", "oracle")


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteRecord:
    scene: SceneSpec
    goal: GoalSpec
    seed: int

    def to_json(self) -> dict:
        return {"scene": self.scene.to_json(), "goal": self.goal.to_json(), "seed": int(self.seed)}

    @classmethod
    def from_json(cls, doc: dict) -> "SuiteRecord":
        return cls(SceneSpec.from_json(doc["scene"]), GoalSpec.from_json(doc["goal"]), int(doc["seed"]))


@dataclass(frozen=True)
class RunConfig:
    noise: NoiseConfig = NoiseConfig()
    planner: PlannerConfig = PlannerConfig()
    camera: CameraModel = CameraModel()
    num_particles: int = 10_000
    jitter_std: float = 0.025
    master_seed: int = 0
    jobs: int = 1

    def to_json(self) -> dict:
        return {
            "noise": self.noise.to_json(),
            "planner": self.planner.to_json(),
            "env": {"num_particles": self.num_particles, "jitter_std": self.jitter_std},
            "master_seed": self.master_seed,
            "jobs": self.jobs,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        env = doc.get("env", {})
        return cls(
            noise=NoiseConfig.from_json(doc["noise"]) if "noise" in doc else NoiseConfig(),
            planner=PlannerConfig.from_json(doc["planner"]) if "planner" in doc else PlannerConfig(),
            num_particles=int(env.get("num_particles", 10_000)),
            jitter_std=float(env.get("jitter_std", 0.025)),
            master_seed=int(doc.get("master_seed", 0)),
            jobs=int(doc.get("jobs", 1)),
        )


@dataclass(frozen=True)
class EpisodeResult:
    scene_id: int
    target_category: int
    agent: str
    success: bool
    steps: int
    dphi: float  # elevation error (rad)
    dtheta: float  # azimuth error (rad), not symmetry-reduced
    dr: float  # range error (m)
    trajectory_length: float
    seed: int

    def to_json(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "target_category": self.target_category,
            "agent": self.agent,
            "success": self.success,
            "steps": self.steps,
            "dphi": self.dphi,
            "dtheta": self.dtheta,
            "dr": self.dr,
            "trajectory_length": self.trajectory_length,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EpisodeResult":
        return cls(
            int(doc["scene_id"]),
            int(doc["target_category"]),
            str(doc["agent"]),
            bool(doc["success"]),
            int(doc["steps"]),
            float(doc["dphi"]),
            float(doc["dtheta"]),
            float(doc["dr"]),
            float(doc["trajectory_length"]),
            int(doc["seed"]),
        )


def build_suite(seed: int, per_category: int) -> list[SuiteRecord]:
    """Deterministic evaluation suite: per_category scenes per target.

    Object counts are uniform in 1..5 with the target always present; the
    companion categories are drawn without replacement from the rest.
    """
    if per_category < 1:
        raise BenchError("per_category must be >= 1")
    records = []
    for target in CATEGORIES:
        for i in range(per_category):
            rng = np.random.default_rng(np.random.SeedSequence([seed, target.id, i]))
            num_objects = int(rng.integers(1, 6))
            others = [c for c in CATEGORIES if c.id != target.id]
            idx = rng.choice(len(others), size=num_objects - 1, replace=False)
            cats = (target,) + tuple(others[j] for j in idx)
            scene_seed = int(rng.integers(2**62))
            scene = generate_scene(scene_seed, num_objects, cats)
            goal = sample_goal(scene, int(rng.integers(2**62)), target_category=target.id)
            records.append(SuiteRecord(scene, goal, int(rng.integers(2**62))))
    return records


def write_suite(records: list[SuiteRecord], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([r.to_json() for r in records], fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_suite(path: str) -> list[SuiteRecord]:
    with open(path) as fh:
        return [SuiteRecord.from_json(doc) for doc in json.load(fh)]


def make_agent(name: str, record: SuiteRecord, cfg: RunConfig, rng: np.random.Generator):
    if name == "aif":
        return AifAgent(
            record.goal, cfg.planner, cfg.camera, cfg.noise, rng,
            num_particles=cfg.num_particles, jitter_std=cfg.jitter_std,
        )
    if name == "greedy":
        return GreedyAgent(
            record.goal, cfg.planner, cfg.camera, cfg.noise, rng, variant="vanilla",
            num_particles=cfg.num_particles, jitter_std=cfg.jitter_std,
        )
    if name == "greedy-infogain":
        return GreedyAgent(
            record.goal, cfg.planner, cfg.camera, cfg.noise, rng, variant="infogain",
            num_particles=cfg.num_particles, jitter_std=cfg.jitter_std,
        )
    if name == "random":
        return RandomAgent(rng)
    if name == "oracle":
        return OracleAgent(record.goal, record.scene, cfg.planner)
    raise BenchError(f"unknown agent {name!r}")


def run_episode(
    record: SuiteRecord,
    agent_name: str,
    cfg: RunConfig,
    scene_id: int = 0,
    collect_trace: bool = False,
):
    """Run one episode to success or the step cap.

    Returns the :class:`EpisodeResult`, plus the trace document when
    ``collect_trace`` is set.
    """
    seq = np.random.SeedSequence([cfg.master_seed, scene_id, record.seed])
    obs_rng, agent_rng = (np.random.default_rng(s) for s in seq.spawn(2))
    agent = make_agent(agent_name, record, cfg, agent_rng)
    state = initial_state(record.scene)
    success = False
    trajectory = 0.0
    trace_steps = []

    while not state.done:
        obs = observe(record.scene, state.camera, cfg.camera, cfg.noise, obs_rng)
        bank = getattr(agent, "bank", None)
        if collect_trace and bank is not None:
            priors = {c: bank.position[c] for c in bank.categories()}
        action = agent.act(state, obs)
        prev = state.camera.position
        state = apply_action(state, action)
        trajectory += float(np.linalg.norm(state.camera.position - prev))
        if collect_trace:
            entry = {
                "step": state.step_count,
                "camera_position": [float(x) for x in state.camera.position],
                "camera_orientation": [[float(x) for x in row] for row in state.camera.orientation],
            }
            if bank is not None:
                entry["beliefs"] = {}
                kl_total = 0.0
                for c in bank.categories():
                    b = bank.position[c]
                    kl_total += kl_histogram(b, priors[c])
                    stride = max(1, b.num_particles // 100)
                    entry["beliefs"][str(c)] = {
                        "mean": [float(x) for x in b.mean()],
                        "covariance": [[float(x) for x in row] for row in b.covariance()],
                        "entropy": belief_entropy(b),
                        "particles": b.positions[::stride].round(4).tolist(),
                        "weights": b.weights[::stride].tolist(),
                    }
                entry["position_kl"] = kl_total
            breakdown = getattr(agent, "last_breakdown", None)
            if breakdown is not None:
                entry["efe"] = breakdown.to_json()
            trace_steps.append(entry)
        if check_success(state.camera, record.goal, record.scene):
            success = True
            break

    dphi, dtheta, dr = object_centric_errors(
        state.camera, record.goal, record.scene, reduce_symmetry=False
    )
    result = EpisodeResult(
        scene_id=scene_id,
        target_category=record.goal.target_category,
        agent=agent_name,
        success=success,
        steps=state.step_count,
        dphi=dphi,
        dtheta=dtheta,
        dr=dr,
        trajectory_length=trajectory,
        seed=record.seed,
    )
    if collect_trace:
        trace = {
            "scene": record.scene.to_json(),
            "goal": record.goal.to_json(),
            "agent": agent_name,
            "result": result.to_json(),
            "steps": trace_steps,
        }
        return result, trace
    return result


def _episode_task(args):
    record_doc, agent_name, cfg_doc, scene_id = args
    record = SuiteRecord.from_json(record_doc)
    cfg = RunConfig.from_json(cfg_doc)
    return run_episode(record, agent_name, cfg, scene_id).to_json()


def run_suite(
    records: list[SuiteRecord], agent_name: str, cfg: RunConfig, jobs: int = 1
) -> list[EpisodeResult]:
    """Run every record; results are identical for any worker count."""
    tasks = [
        (r.to_json(), agent_name, cfg.to_json(), i) for i, r in enumerate(records)
    ]
    if jobs <= 1:
        docs = [_episode_task(t) for t in tasks]
    else:
        with multiprocessing.get_context("spawn").Pool(jobs) as pool:
            docs = pool.map(_episode_task, tasks, chunksize=1)
    return [EpisodeResult.from_json(d) for d in docs]


@dataclass(frozen=True)
class MetricsRow:
    agent: str
    category: str  # category name or "total"
    n: int
    success_pct: float
    dphi_mean: float
    dphi_se: float
    dtheta_mean: float
    dtheta_se: float
    dr_mean: float
    dr_se: float


CSV_HEADER = "agent,category,n,success_pct,dphi_mean,dphi_se,dtheta_mean,dtheta_se,dr_mean,dr_se"


def _stats(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def aggregate(results: list[EpisodeResult]) -> list[MetricsRow]:
    """Group results per (agent, category) plus per-agent totals."""
    if not results:
        raise BenchError("no results to aggregate")
    rows = []
    agents = sorted({r.agent for r in results})
    for agent in agents:
        sub = [r for r in results if r.agent == agent]
        groups = [
            (category(cat).name, [r for r in sub if r.target_category == cat])
            for cat in sorted({r.target_category for r in sub})
        ]
        groups.append(("total", sub))
        for name, grp in groups:
            dphi = _stats([r.dphi for r in grp])
            dtheta = _stats([r.dtheta for r in grp])
            dr = _stats([r.dr for r in grp])
            rows.append(
                MetricsRow(
                    agent=agent,
                    category=name,
                    n=len(grp),
                    success_pct=100.0 * sum(r.success for r in grp) / len(grp),
                    dphi_mean=dphi[0],
                    dphi_se=dphi[1],
                    dtheta_mean=dtheta[0],
                    dtheta_se=dtheta[1],
                    dr_mean=dr[0],
                    dr_se=dr[1],
                )
            )
    return rows


def metrics_csv(rows: list[MetricsRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.agent},{r.category},{r.n},{r.success_pct:.1f},"
            f"{r.dphi_mean:.4f},{r.dphi_se:.4f},{r.dtheta_mean:.4f},{r.dtheta_se:.4f},"
            f"{r.dr_mean:.4f},{r.dr_se:.4f}"
        )
    return "\n".join(lines) + "\n"


def metrics_text(rows: list[MetricsRow]) -> str:
    """Aligned mean +/- standard-error table, one block per agent."""
    header = f"{'agent':<16}{'category':<18}{'n':>5}  {'%s':>6}  {'dphi':>16}  {'dtheta':>16}  {'dr':>16}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.agent:<16}{r.category:<18}{r.n:>5}  {r.success_pct:>6.1f}  "
            f"{r.dphi_mean:>7.3f} ± {r.dphi_se:<6.3f}  "
            f"{r.dtheta_mean:>7.3f} ± {r.dtheta_se:<6.3f}  "
            f"{r.dr_mean:>7.3f} ± {r.dr_se:<6.3f}"
        )
    return "\n".join(lines) + "\n"


def write_results(results: list[EpisodeResult], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([r.to_json() for r in results], fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_results(path: str) -> list[EpisodeResult]:
    with open(path) as fh:
        return [EpisodeResult.from_json(doc) for doc in json.load(fh)]


def export_trace(trace: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(trace, fh)
        fh.write("\n")
