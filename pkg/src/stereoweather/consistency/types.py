"""Types for the cross-view patch consistency module."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class PatchSet:
    """Two-view token tensor: ``data[0]`` = left-view patches, ``data[1]`` = right.

    ``disparity`` optionally carries one matching signal per token ([2, N],
    expressed at patch scale); generation attaches the resampled predicted
    depth here because generated images have no ground truth mid-denoise.
    """

    data: np.ndarray  # [2, N, C]
    patch_grid: Tuple[int, int]  # (rows, cols), rows * cols == N
    scale: int  # latent downsampling factor, > 0
    disparity: Optional[np.ndarray] = None  # [2, N] or None

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[0] != 2:
            raise ValueError(f"data must be [2, N, C], got {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValueError("patch data must be finite")
        rows, cols = self.patch_grid
        if rows * cols != self.data.shape[1]:
            raise ValueError(
                f"patch_grid {self.patch_grid} inconsistent with N={self.data.shape[1]}"
            )
        if self.scale <= 0:
            raise ValueError("scale must be a positive integer")
        if self.disparity is not None and self.disparity.shape != self.data.shape[:2]:
            raise ValueError(
                f"disparity must be [2, N]={self.data.shape[:2]}, got {self.disparity.shape}"
            )

    @property
    def num_patches(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray) -> "PatchSet":
        return replace(self, data=data)


@dataclass(frozen=True)
class TokenSet:
    """One view's tokens plus the optional per-token matching signal."""

    features: np.ndarray  # [N, C]
    disparity: Optional[np.ndarray] = None  # [N]

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class MatchMap:
    """The selected top-n src->dst links, ordered by decreasing similarity.

    Ties are resolved by (lower src_index, then lower dst_index); src indices
    are pairwise distinct because every source links to exactly one
    destination before selection.
    """

    pairs: Tuple[Tuple[int, int, float], ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.pairs) != self.n:
            raise ValueError(f"expected exactly n={self.n} pairs, got {len(self.pairs)}")
        src_indices = [p[0] for p in self.pairs]
        if len(src_indices) != len(set(src_indices)):
            raise ValueError("src indices must be pairwise distinct")

    def src_indices(self) -> list[int]:
        return [p[0] for p in self.pairs]

    def dst_indices(self) -> list[int]:
        return [p[1] for p in self.pairs]

    def validate_against(self, n_src: int, n_dst: int) -> None:
        for src, dst, _ in self.pairs:
            if not (0 <= src < n_src and 0 <= dst < n_dst):
                raise ValueError(
                    f"pair ({src}, {dst}) out of range for sizes ({n_src}, {n_dst})"
                )


@dataclass(frozen=True)
class SimilarityConfig:
    """Convex combination of disparity agreement and feature similarity.

    similarity = alpha * (1 - |d_s - d_d| / d_max, clipped to [0, 1])
               + (1 - alpha) * cosine(feature_s, feature_d)
    """

    alpha: float = 0.5
    d_max: float = 192.0
    feature_metric: str = "cosine"
    disparity_metric: str = "absdiff"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.d_max <= 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")
        if self.feature_metric != "cosine":
            raise ValueError(f"unsupported feature_metric {self.feature_metric!r}")
        if self.disparity_metric != "absdiff":
            raise ValueError(f"unsupported disparity_metric {self.disparity_metric!r}")

    def at_scale(self, scale: int) -> "SimilarityConfig":
        """Config for tokens at a given patch scale: d_max is divided by it."""
        return SimilarityConfig(
            alpha=self.alpha,
            d_max=self.d_max / scale,
            feature_metric=self.feature_metric,
            disparity_metric=self.disparity_metric,
        )


__all__ = ["MatchMap", "PatchSet", "SimilarityConfig", "TokenSet"]
