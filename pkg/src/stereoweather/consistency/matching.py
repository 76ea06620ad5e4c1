"""Cross-view patch partitioning, similarity, and top-n link selection.

The per-source scan is the hot loop of the generation pipeline (it runs at
every denoising step for every hooked attention site), so it is backed by a
compiled kernel when available. Set ``STEREOWEATHER_NO_EXT=1`` to force the
numpy fallback; ``active_kernel()`` reports which one is in use.
"""

from __future__ import annotations

import os

import numpy as np

from . import _match_fallback
from .types import MatchMap, PatchSet, SimilarityConfig, TokenSet

if os.environ.get("STEREOWEATHER_NO_EXT"):
    _kernel = _match_fallback
    _KERNEL_NAME = "numpy"
else:
    try:
        from . import _matchext as _kernel  # type: ignore[no-redef]

        _KERNEL_NAME = "cython"
    except ImportError:  # extension not built; degrade silently
        _kernel = _match_fallback
        _KERNEL_NAME = "numpy"


def active_kernel() -> str:
    """Name of the best-link implementation selected at import."""
    return _KERNEL_NAME


def partition(patches: PatchSet) -> tuple[TokenSet, TokenSet]:
    """Split a two-view PatchSet into (src, dst) = (left tokens, right tokens)."""
    left_disp = patches.disparity[0] if patches.disparity is not None else None
    right_disp = patches.disparity[1] if patches.disparity is not None else None
    return (
        TokenSet(features=patches.data[0], disparity=left_disp),
        TokenSet(features=patches.data[1], disparity=right_disp),
    )


def patch_similarity(
    src_feature: np.ndarray,
    src_disparity: float,
    dst_feature: np.ndarray,
    dst_disparity: float,
    cfg: SimilarityConfig,
) -> float:
    """Similarity of one src/dst token pair in [-1, 1].

    Cosine feature similarity (0 for a zero-norm vector) combined with the
    normalized disparity agreement term, weighted by cfg.alpha.
    """
    src_feature = np.asarray(src_feature, dtype=np.float64)
    dst_feature = np.asarray(dst_feature, dtype=np.float64)
    if src_feature.shape != dst_feature.shape:
        raise ValueError(
            f"feature length mismatch: {src_feature.shape} vs {dst_feature.shape}"
        )
    if not (np.isfinite(src_disparity) and np.isfinite(dst_disparity)):
        raise ValueError("disparity values must be finite")

    denom = float(np.linalg.norm(src_feature) * np.linalg.norm(dst_feature))
    sim_feat = float(src_feature @ dst_feature) / denom if denom > 0.0 else 0.0
    sim_disp = float(np.clip(1.0 - abs(src_disparity - dst_disparity) / cfg.d_max, 0.0, 1.0))
    return cfg.alpha * sim_disp + (1.0 - cfg.alpha) * sim_feat


def _as_kernel_inputs(tokens: TokenSet) -> tuple[np.ndarray, np.ndarray]:
    feat = np.ascontiguousarray(tokens.features, dtype=np.float64)
    if tokens.disparity is None:
        disp = np.zeros(feat.shape[0], dtype=np.float64)
    else:
        disp = np.ascontiguousarray(tokens.disparity, dtype=np.float64)
    return feat, disp


def match_top_n(src: TokenSet, dst: TokenSet, n: int, cfg: SimilarityConfig) -> MatchMap:
    """Link each src token to its most-similar dst token, keep the n best links.

    Ties are broken by (lower src index, then lower dst index). If either set
    lacks a disparity signal the disparity term is dropped (alpha treated as
    0) rather than compared against a meaningless zero.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > len(src):
        raise ValueError(f"n={n} exceeds the number of source tokens ({len(src)})")
    if src.features.shape[1:] != dst.features.shape[1:]:
        raise ValueError("src and dst token widths differ")
    if n == 0:
        return MatchMap(pairs=(), n=0)

    alpha = cfg.alpha if (src.disparity is not None and dst.disparity is not None) else 0.0
    src_feat, src_disp = _as_kernel_inputs(src)
    dst_feat, dst_disp = _as_kernel_inputs(dst)
    best_dst, best_sim = _kernel.best_links(
        src_feat, dst_feat, src_disp, dst_disp, alpha, cfg.d_max
    )

    # primary key: similarity descending; then src asc, then dst asc
    src_idx = np.arange(len(src))
    order = np.lexsort((best_dst, src_idx, -best_sim))
    selected = order[:n]
    pairs = tuple(
        (int(i), int(best_dst[i]), float(best_sim[i])) for i in selected
    )
    return MatchMap(pairs=pairs, n=n)


__all__ = ["active_kernel", "match_top_n", "partition", "patch_similarity"]
