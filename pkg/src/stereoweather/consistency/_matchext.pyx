# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused per-source best-link scan over two token sets.

Computes, for every source token, the combined disparity/cosine similarity
against every destination token and keeps the running argmax, without ever
materializing the N x N similarity matrix. Functionally identical to
``_match_fallback.best_links``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt


def best_links(
    cnp.float64_t[:, ::1] src_feat,
    cnp.float64_t[:, ::1] dst_feat,
    cnp.float64_t[::1] src_disp,
    cnp.float64_t[::1] dst_disp,
    double alpha,
    double d_max,
):
    cdef Py_ssize_t n_src = src_feat.shape[0]
    cdef Py_ssize_t n_dst = dst_feat.shape[0]
    cdef Py_ssize_t c = src_feat.shape[1]
    cdef Py_ssize_t i, j, k

    best_dst = np.zeros(n_src, dtype=np.int64)
    best_sim = np.full(n_src, -np.inf, dtype=np.float64)
    cdef cnp.int64_t[::1] best_dst_v = best_dst
    cdef cnp.float64_t[::1] best_sim_v = best_sim

    if n_src == 0 or n_dst == 0:
        return best_dst, best_sim

    dst_norm = np.zeros(n_dst, dtype=np.float64)
    cdef cnp.float64_t[::1] dst_norm_v = dst_norm
    cdef double acc
    for j in range(n_dst):
        acc = 0.0
        for k in range(c):
            acc += dst_feat[j, k] * dst_feat[j, k]
        dst_norm_v[j] = sqrt(acc)

    cdef double beta = 1.0 - alpha
    cdef double src_n, dot, denom, sim_feat, sim_disp, sim, best, di
    cdef Py_ssize_t arg

    for i in range(n_src):
        acc = 0.0
        for k in range(c):
            acc += src_feat[i, k] * src_feat[i, k]
        src_n = sqrt(acc)
        di = src_disp[i]

        best = -np.inf
        arg = 0
        for j in range(n_dst):
            dot = 0.0
            for k in range(c):
                dot += src_feat[i, k] * dst_feat[j, k]
            denom = src_n * dst_norm_v[j]
            sim_feat = dot / denom if denom > 0.0 else 0.0

            sim_disp = 1.0 - fabs(di - dst_disp[j]) / d_max
            if sim_disp < 0.0:
                sim_disp = 0.0
            elif sim_disp > 1.0:
                sim_disp = 1.0

            sim = alpha * sim_disp + beta * sim_feat
            if sim > best:  # strict: ties keep the lower dst index
                best = sim
                arg = j

        best_dst_v[i] = arg
        best_sim_v[i] = best

    return best_dst, best_sim
