"""Domain types shared by every stage: stereo samples and dataset manifests."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ManifestError

#: Subset labels a manifest may carry (weather conditions plus "normal").
DEFAULT_SUBSET_LABELS = frozenset(
    {"rainy", "sunny", "foggy", "cloudy", "snow", "snowy", "dense_fog", "light_fog", "normal"}
)


@dataclass(frozen=True)
class StereoSample:
    """A rectified left/right pair with left-view disparity ground truth.

    Images are [3, H, W] float32 in [0, 1]; disparity is [H, W] float32 in
    pixels; valid_mask flags pixels that carry ground truth (sparse sensors
    leave holes). Invalid pixels may hold arbitrary disparity values.
    """

    left: np.ndarray
    right: np.ndarray
    disparity: np.ndarray
    valid_mask: np.ndarray
    id: str

    def __post_init__(self) -> None:
        for name in ("left", "right"):
            img = getattr(self, name)
            if img.ndim != 3 or img.shape[0] != 3:
                raise ValueError(f"{name} must be [3, H, W], got {img.shape}")
        if self.left.shape != self.right.shape:
            raise ValueError(
                f"left/right shape mismatch: {self.left.shape} vs {self.right.shape}"
            )
        h, w = self.left.shape[1:]
        if self.disparity.shape != (h, w):
            raise ValueError(
                f"disparity shape {self.disparity.shape} does not match images ({h}, {w})"
            )
        if self.valid_mask.shape != (h, w):
            raise ValueError(f"valid_mask shape {self.valid_mask.shape} != ({h}, {w})")
        if self.valid_mask.dtype != np.bool_:
            raise ValueError("valid_mask must be boolean")
        valid_disp = self.disparity[self.valid_mask]
        if valid_disp.size and (not np.isfinite(valid_disp).all() or (valid_disp < 0).any()):
            raise ValueError("disparity must be finite and >= 0 wherever valid_mask is true")

    @property
    def height(self) -> int:
        return self.left.shape[1]

    @property
    def width(self) -> int:
        return self.left.shape[2]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    left_path: Path
    right_path: Path
    disparity_path: Path
    subset_label: str


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    split: str
    entries: Sequence[ManifestEntry] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ManifestError(f"duplicate ids in manifest for {self.root}/{self.split}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]
