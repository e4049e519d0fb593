"""Pure-numpy implementations of the hot kernels.

Semantics must match ``_speedups.pyx`` bit-for-bit at float64 tolerance;
``tests/test_kernels.py`` enforces the equivalence whenever the compiled
backend is available.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 512  # candidates per block; bounds temporary memory to a few MB


def frustum_masks(cam_positions, cam_rotations, points, focal, cx, cy, width, height, min_depth):
    """Frustum membership of N points for C camera poses -> uint8 (C, N)."""
    points = np.asarray(points, dtype=np.float64)
    cam_positions = np.asarray(cam_positions, dtype=np.float64)
    cam_rotations = np.asarray(cam_rotations, dtype=np.float64)
    out = np.empty((cam_positions.shape[0], points.shape[0]), dtype=np.uint8)
    for start in range(0, cam_positions.shape[0], _CHUNK):
        stop = min(start + _CHUNK, cam_positions.shape[0])
        rel = points[None, :, :] - cam_positions[start:stop, None, :]
        q = np.einsum("cnj,cji->cni", rel, cam_rotations[start:stop])
        depth = -q[:, :, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = cx + focal * q[:, :, 0] / depth
            v = cy - focal * q[:, :, 1] / depth
        mask = (
            (depth > min_depth)
            & (u >= 0.0) & (u < width)
            & (v >= 0.0) & (v < height)
        )
        out[start:stop] = mask.astype(np.uint8)
    return out


def _entropy_rows(bin_weights):
    """Shannon entropy (nats) of each row of a (C, B) weight matrix."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(bin_weights > 0.0, np.log(np.maximum(bin_weights, 1e-300)), 0.0)
    return -np.sum(bin_weights * logw, axis=1)


def info_gain_batch(masks, weights, bins, n_bins, tpr, fpr):
    """Binary-outcome mutual information per candidate viewpoint.

    Detection probability of particle i is ``tpr`` inside the frustum and
    ``fpr`` outside; entropies are evaluated on the fixed histogram whose
    per-particle bin indices are given in ``bins``.
    """
    masks = np.asarray(masks, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bins = np.asarray(bins, dtype=np.int64)
    n_c = masks.shape[0]

    prior_bins = np.bincount(bins, weights=weights, minlength=n_bins)
    h_prior = _entropy_rows(prior_bins[None, :])[0]

    out = np.empty(n_c, dtype=np.float64)
    for start in range(0, n_c, _CHUNK):
        stop = min(start + _CHUNK, n_c)
        like = fpr + (tpr - fpr) * masks[start:stop]
        wl = weights[None, :] * like
        p_det = wl.sum(axis=1)
        wm = weights[None, :] - wl

        rows = np.arange(stop - start)[:, None]
        flat = (rows * n_bins + bins[None, :]).ravel()
        det_bins = np.bincount(flat, weights=wl.ravel(), minlength=(stop - start) * n_bins)
        miss_bins = np.bincount(flat, weights=wm.ravel(), minlength=(stop - start) * n_bins)
        det_bins = det_bins.reshape(stop - start, n_bins)
        miss_bins = miss_bins.reshape(stop - start, n_bins)

        safe_det = np.maximum(p_det, 1e-300)
        safe_miss = np.maximum(1.0 - p_det, 1e-300)
        h_det = _entropy_rows(det_bins / safe_det[:, None])
        h_miss = _entropy_rows(miss_bins / safe_miss[:, None])
        ig = h_prior - p_det * h_det - (1.0 - p_det) * h_miss
        ig[p_det <= 0.0] = 0.0
        ig[p_det >= 1.0] = h_prior - h_det[p_det >= 1.0]
        out[start:stop] = ig
    return out


def frustum_info_gain(
    cam_positions, cam_rotations, points, weights, bins, n_bins,
    focal, cx, cy, width, height, min_depth, tpr, fpr,
):
    """Fused frustum test + information gain, one pass per candidate block.

    Equivalent to ``info_gain_batch(frustum_masks(...), ...)`` without
    materializing the full mask matrix; the planner's hottest path.
    """
    cam_positions = np.asarray(cam_positions, dtype=np.float64)
    out = np.empty(cam_positions.shape[0], dtype=np.float64)
    for start in range(0, cam_positions.shape[0], _CHUNK):
        stop = min(start + _CHUNK, cam_positions.shape[0])
        masks = frustum_masks(
            cam_positions[start:stop], cam_rotations[start:stop], points,
            focal, cx, cy, width, height, min_depth,
        )
        out[start:stop] = info_gain_batch(masks, weights, bins, n_bins, tpr, fpr)
    return out


def kde_batch(queries, points, weights, bandwidth):
    """Isotropic-Gaussian KDE of a weighted point set at query locations."""
    queries = np.asarray(queries, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    norm = (2.0 * np.pi) ** -1.5 * bandwidth**-3
    inv2b2 = 0.5 / bandwidth**2
    out = np.empty(queries.shape[0], dtype=np.float64)
    for start in range(0, queries.shape[0], _CHUNK):
        stop = min(start + _CHUNK, queries.shape[0])
        d2 = np.sum(
            (queries[start:stop, None, :] - points[None, :, :]) ** 2, axis=2
        )
        out[start:stop] = norm * np.exp(-d2 * inv2b2) @ weights
    return out
