# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: frustum tests, candidate info gain, KDE.

Mirrors ``_fallback.py``; keep both in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()


def frustum_masks(cam_positions, cam_rotations, points,
                  double focal, double cx, double cy,
                  double width, double height, double min_depth):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pos = np.ascontiguousarray(cam_positions, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] rot = np.ascontiguousarray(cam_rotations, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n_c = pos.shape[0]
    cdef Py_ssize_t n_p = pts.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((n_c, n_p), dtype=np.uint8)
    cdef Py_ssize_t c, i
    cdef double rx, ry, rz, qx, qy, qz, depth, u, v
    cdef double r00, r01, r02, r10, r11, r12, r20, r21, r22
    cdef double px, py, pz
    for c in range(n_c):
        px = pos[c, 0]; py = pos[c, 1]; pz = pos[c, 2]
        r00 = rot[c, 0, 0]; r01 = rot[c, 0, 1]; r02 = rot[c, 0, 2]
        r10 = rot[c, 1, 0]; r11 = rot[c, 1, 1]; r12 = rot[c, 1, 2]
        r20 = rot[c, 2, 0]; r21 = rot[c, 2, 1]; r22 = rot[c, 2, 2]
        for i in range(n_p):
            rx = pts[i, 0] - px; ry = pts[i, 1] - py; rz = pts[i, 2] - pz
            # camera coords: q = R^T (p - pos)
            qx = r00 * rx + r10 * ry + r20 * rz
            qy = r01 * rx + r11 * ry + r21 * rz
            qz = r02 * rx + r12 * ry + r22 * rz
            depth = -qz
            if depth <= min_depth:
                continue
            u = cx + focal * qx / depth
            v = cy - focal * qy / depth
            if 0.0 <= u < width and 0.0 <= v < height:
                out[c, i] = 1
    return out


def info_gain_batch(masks, weights, bins, Py_ssize_t n_bins, double tpr, double fpr):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(masks, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] b = np.ascontiguousarray(bins, dtype=np.int64)
    cdef Py_ssize_t n_c = m.shape[0]
    cdef Py_ssize_t n_p = m.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_c, dtype=np.float64)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] prior = np.zeros(n_bins, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det = np.zeros(n_bins, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] occupied = np.zeros(n_bins, dtype=np.int64)
    cdef Py_ssize_t i, c, k, n_occ = 0
    cdef double h_prior = 0.0, h_det, h_miss, p_det, like, wl, pb, db, mb
    cdef double safe_det, safe_miss, x

    for i in range(n_p):
        if prior[b[i]] == 0.0 and w[i] > 0.0:
            occupied[n_occ] = b[i]
            n_occ += 1
        prior[b[i]] += w[i]
    for k in range(n_occ):
        x = prior[occupied[k]]
        if x > 0.0:
            h_prior -= x * log(x)

    for c in range(n_c):
        p_det = 0.0
        for k in range(n_occ):
            det[occupied[k]] = 0.0
        for i in range(n_p):
            like = tpr if m[c, i] else fpr
            wl = w[i] * like
            det[b[i]] += wl
            p_det += wl
        if p_det <= 0.0:
            out[c] = 0.0
            continue
        safe_det = p_det
        safe_miss = 1.0 - p_det
        h_det = 0.0
        h_miss = 0.0
        for k in range(n_occ):
            pb = prior[occupied[k]]
            db = det[occupied[k]]
            mb = pb - db
            if db > 0.0:
                x = db / safe_det
                h_det -= x * log(x)
            if mb > 0.0 and safe_miss > 0.0:
                x = mb / safe_miss
                h_miss -= x * log(x)
        if safe_miss <= 0.0:
            out[c] = h_prior - h_det
        else:
            out[c] = h_prior - p_det * h_det - safe_miss * h_miss
    return out


def frustum_info_gain(cam_positions, cam_rotations, points, weights, bins,
                      Py_ssize_t n_bins, double focal, double cx, double cy,
                      double width, double height, double min_depth,
                      double tpr, double fpr):
    """Fused frustum test + information gain, one pass per candidate.

    Equivalent to ``info_gain_batch(frustum_masks(...), ...)`` without
    materializing the mask matrix; the planner's hottest path.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pos = np.ascontiguousarray(cam_positions, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] rot = np.ascontiguousarray(cam_rotations, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] b = np.ascontiguousarray(bins, dtype=np.int64)
    cdef Py_ssize_t n_c = pos.shape[0]
    cdef Py_ssize_t n_p = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_c, dtype=np.float64)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] prior = np.zeros(n_bins, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] det = np.zeros(n_bins, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] occupied = np.zeros(n_bins, dtype=np.int64)
    cdef Py_ssize_t i, c, k, n_occ = 0
    cdef double h_prior = 0.0, h_det, h_miss, p_det, like, wl, pb, db, mb
    cdef double safe_det, safe_miss, x
    cdef double rx, ry, rz, qx, qy, qz, depth, u, v
    cdef double r00, r01, r02, r10, r11, r12, r20, r21, r22
    cdef double px, py, pz
    cdef bint inside

    for i in range(n_p):
        if prior[b[i]] == 0.0 and w[i] > 0.0:
            occupied[n_occ] = b[i]
            n_occ += 1
        prior[b[i]] += w[i]
    for k in range(n_occ):
        x = prior[occupied[k]]
        if x > 0.0:
            h_prior -= x * log(x)

    for c in range(n_c):
        px = pos[c, 0]; py = pos[c, 1]; pz = pos[c, 2]
        r00 = rot[c, 0, 0]; r01 = rot[c, 0, 1]; r02 = rot[c, 0, 2]
        r10 = rot[c, 1, 0]; r11 = rot[c, 1, 1]; r12 = rot[c, 1, 2]
        r20 = rot[c, 2, 0]; r21 = rot[c, 2, 1]; r22 = rot[c, 2, 2]
        p_det = 0.0
        for k in range(n_occ):
            det[occupied[k]] = 0.0
        for i in range(n_p):
            rx = pts[i, 0] - px; ry = pts[i, 1] - py; rz = pts[i, 2] - pz
            qx = r00 * rx + r10 * ry + r20 * rz
            qy = r01 * rx + r11 * ry + r21 * rz
            qz = r02 * rx + r12 * ry + r22 * rz
            depth = -qz
            inside = False
            if depth > min_depth:
                u = cx + focal * qx / depth
                v = cy - focal * qy / depth
                if 0.0 <= u < width and 0.0 <= v < height:
                    inside = True
            like = tpr if inside else fpr
            wl = w[i] * like
            det[b[i]] += wl
            p_det += wl
        if p_det <= 0.0:
            out[c] = 0.0
            continue
        safe_det = p_det
        safe_miss = 1.0 - p_det
        h_det = 0.0
        h_miss = 0.0
        for k in range(n_occ):
            pb = prior[occupied[k]]
            db = det[occupied[k]]
            mb = pb - db
            if db > 0.0:
                x = db / safe_det
                h_det -= x * log(x)
            if mb > 0.0 and safe_miss > 0.0:
                x = mb / safe_miss
                h_miss -= x * log(x)
        if safe_miss <= 0.0:
            out[c] = h_prior - h_det
        else:
            out[c] = h_prior - p_det * h_det - safe_miss * h_miss
    return out


def kde_batch(queries, points, weights, double bandwidth):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n_q = q.shape[0]
    cdef Py_ssize_t n_p = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_q, dtype=np.float64)
    cdef double norm = (2.0 * np.pi) ** -1.5 * bandwidth ** -3
    cdef double inv2b2 = 0.5 / (bandwidth * bandwidth)
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, acc
    for i in range(n_q):
        acc = 0.0
        for j in range(n_p):
            dx = q[i, 0] - p[j, 0]
            dy = q[i, 1] - p[j, 1]
            dz = q[i, 2] - p[j, 2]
            acc += w[j] * exp(-(dx * dx + dy * dy + dz * dz) * inv2b2)
        out[i] = norm * acc
    return out
