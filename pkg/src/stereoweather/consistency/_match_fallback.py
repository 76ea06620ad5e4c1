"""Pure-numpy implementation of the per-source best-link scan.

Kept in exact functional agreement with the compiled kernel in
``_matchext.pyx``; which one is active is decided once at import in
``matching.py``. All arithmetic is float64 so both paths resolve ties
identically on duplicated tokens.
"""

from __future__ import annotations

import numpy as np


def best_links(
    src_feat: np.ndarray,
    dst_feat: np.ndarray,
    src_disp: np.ndarray,
    dst_disp: np.ndarray,
    alpha: float,
    d_max: float,
) -> tuple[np.ndarray, np.ndarray]:
    """For each src token return (index of most-similar dst, that similarity).

    Ties pick the lower dst index. Inputs are float64 [N, C] / [N]; a
    zero-norm feature vector contributes cosine similarity 0.
    """
    dots = src_feat @ dst_feat.T
    src_norm = np.linalg.norm(src_feat, axis=1)
    dst_norm = np.linalg.norm(dst_feat, axis=1)
    denom = np.outer(src_norm, dst_norm)
    with np.errstate(divide="ignore", invalid="ignore"):
        sim_feat = np.where(denom > 0.0, dots / denom, 0.0)
    sim_disp = np.clip(1.0 - np.abs(src_disp[:, None] - dst_disp[None, :]) / d_max, 0.0, 1.0)
    sim = alpha * sim_disp + (1.0 - alpha) * sim_feat
    best_dst = np.argmax(sim, axis=1)  # first occurrence == lowest dst index
    best_sim = sim[np.arange(sim.shape[0]), best_dst]
    return best_dst.astype(np.int64), best_sim.astype(np.float64)
