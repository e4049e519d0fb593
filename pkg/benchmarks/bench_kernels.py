"""Compare the compiled kernel backend against the numpy fallback.

Runs the hot kernels (frustum masks, batched information gain, the fused
frustum+info-gain pass, batched KDE) at planner-realistic sizes and prints
per-backend timings plus agreement checks.

Usage: python benchmarks/bench_kernels.py [--candidates C] [--particles N]
"""

import argparse
import math
import time

import numpy as np

from scenesearch.belief import N_BINS, bin_indices
from scenesearch.geometry import CameraModel, Viewpoint, viewpoint_to_camera_pose
from scenesearch.kernels import _fallback

try:
    from scenesearch.kernels import _speedups
except ImportError:
    _speedups = None

MODEL = CameraModel()


def make_inputs(rng, n_candidates, n_particles):
    positions = np.empty((n_candidates, 3))
    rotations = np.empty((n_candidates, 3, 3))
    for i in range(n_candidates):
        pose = viewpoint_to_camera_pose(
            Viewpoint(
                rng.uniform(-0.3, 0.3, 3) * [1, 1, 0],
                rng.uniform(0.25, 0.65),
                rng.uniform(0.15, 1.4),
                rng.uniform(-math.pi, math.pi),
            )
        )
        positions[i] = pose.position
        rotations[i] = pose.orientation
    points = rng.uniform([-0.5, -0.5, 0.0], [0.5, 0.5, 0.2], size=(n_particles, 3))
    weights = rng.uniform(0.5, 1.5, n_particles)
    weights /= weights.sum()
    return positions, rotations, points, weights


def timeit(fn, *args, repeat=5):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--candidates", type=int, default=5000)
    parser.add_argument("--particles", type=int, default=512)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    positions, rotations, points, weights = make_inputs(rng, args.candidates, args.particles)
    mask_args = (
        positions, rotations, points,
        MODEL.focal_pixels, MODEL.cx, MODEL.cy, 480.0, 480.0, 1e-6,
    )
    bins = bin_indices(points)

    backends = [("python", _fallback)]
    if _speedups is not None:
        backends.append(("cython", _speedups))
    else:
        print("compiled backend not built; benchmarking the fallback only")

    print(f"candidates={args.candidates} particles={args.particles}")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")

    results = {}
    for kernel in ("frustum_masks", "info_gain_batch", "frustum_info_gain", "kde_batch"):
        times = []
        outs = []
        for _, impl in backends:
            if kernel == "frustum_masks":
                out, t = timeit(impl.frustum_masks, *mask_args)
            elif kernel == "info_gain_batch":
                masks = results["frustum_masks"]
                out, t = timeit(impl.info_gain_batch, masks, weights, bins, N_BINS, 0.95, 0.0)
            elif kernel == "frustum_info_gain":
                out, t = timeit(
                    impl.frustum_info_gain,
                    positions, rotations, points, weights, bins, N_BINS,
                    *mask_args[3:], 0.95, 0.0,
                )
            else:
                out, t = timeit(impl.kde_batch, positions, points, weights, 0.05)
            times.append(t)
            outs.append(np.asarray(out, dtype=np.float64))
        results[kernel] = outs[0]
        row = f"{kernel:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(outs) == 2:
            agreement = float(np.max(np.abs(outs[0] - outs[1])))
            row += f"{times[0] / times[1]:>9.1f}x"
            row += f"   max|diff|={agreement:.2e}"
        print(row)


if __name__ == "__main__":
    main()
