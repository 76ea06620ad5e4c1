"""Patch fusion / un-fusion around an attention call.

Merged sequence layout (length 2N - n):

    [0 .. N)        destination (right-view) slots in index order; a matched
                    slot holds the fused token, an unmatched one its original
    [N .. 2N - n)   unmatched source (left-view) tokens in index order

``unmerge`` inverts this layout exactly, broadcasting each fused slot back to
both of its original positions, so the composition is the identity on
unmatched positions and leaves matched left/right positions holding the
identical token.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ContractError
from .matching import match_top_n, partition
from .types import MatchMap, PatchSet, SimilarityConfig

AttentionFn = Callable[[np.ndarray], np.ndarray]


def merge(patches: PatchSet, links: MatchMap) -> np.ndarray:
    """Fuse matched src tokens into their dst slots; returns [2N - n, C].

    A destination matched by several sources is fused with all of them
    (arithmetic mean of the dst token and every matched src token); with the
    usual single match this is the pairwise mean.
    """
    n_tokens = patches.num_patches
    links.validate_against(n_tokens, n_tokens)
    left, right = patches.data[0], patches.data[1]

    sums = right.astype(np.float64).copy()
    counts = np.ones(n_tokens, dtype=np.float64)
    matched_src = np.zeros(n_tokens, dtype=bool)
    for src, dst, _ in links.pairs:
        sums[dst] += left[src]
        counts[dst] += 1.0
        matched_src[src] = True

    dst_slots = (sums / counts[:, None]).astype(patches.data.dtype)
    unmatched = left[~matched_src]
    return np.concatenate([dst_slots, unmatched], axis=0)


def unmerge(merged: np.ndarray, links: MatchMap) -> np.ndarray:
    """Invert merge's layout back to [2, N, C].

    Fused slot values (possibly attention-transformed) are broadcast to both
    their src and dst positions; unmatched positions take their slot verbatim.
    """
    if merged.ndim != 2:
        raise ValueError(f"merged tokens must be [M, C], got {merged.shape}")
    total = merged.shape[0] + links.n
    if total % 2 != 0:
        raise ValueError(
            f"merged length {merged.shape[0]} with n={links.n} does not yield 2N tokens"
        )
    n_tokens = total // 2
    links.validate_against(n_tokens, n_tokens)

    out = np.empty((2, n_tokens, merged.shape[1]), dtype=merged.dtype)
    out[1] = merged[:n_tokens]

    matched_src = np.zeros(n_tokens, dtype=bool)
    for src, dst, _ in links.pairs:
        matched_src[src] = True
        out[0, src] = merged[dst]
    out[0, ~matched_src] = merged[n_tokens:]
    return out


def apply_consistency(
    patches: PatchSet,
    n: int,
    cfg: SimilarityConfig,
    attn: AttentionFn,
) -> PatchSet:
    """Match, fuse, attend, un-fuse: the full cross-view consistency pass.

    ``attn`` must map an [M, C] token sequence to an equal-shape sequence.
    With n = 0 and an identity ``attn`` this is exactly the identity map.
    """
    src, dst = partition(patches)
    links = match_top_n(src, dst, n, cfg.at_scale(patches.scale))
    merged = merge(patches, links)
    transformed = np.asarray(attn(merged))
    if transformed.shape != merged.shape:
        raise ContractError(
            f"attention changed token shape {merged.shape} -> {transformed.shape}"
        )
    return patches.with_data(unmerge(transformed, links))


__all__ = ["apply_consistency", "merge", "unmerge"]
