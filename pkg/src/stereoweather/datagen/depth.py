"""Per-view monocular depth prediction used as the generation condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import StereoSample
from ..errors import PipelineError


@dataclass(frozen=True)
class DepthCondition:
    """Normalized inverse-depth maps (near = 1) for both views, [H, W] in [0, 1]."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self) -> None:
        for name, d in (("left", self.left), ("right", self.right)):
            if d.ndim != 2:
                raise ValueError(f"{name} depth must be [H, W], got {d.shape}")
            if not np.isfinite(d).all():
                raise ValueError(f"{name} depth contains non-finite values")
            if d.min() < 0.0 or d.max() > 1.0:
                raise ValueError(f"{name} depth must lie in [0, 1]")
        if self.left.shape != self.right.shape:
            raise ValueError("left/right depth shapes differ")


def normalize_depth(raw: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant map is defined as all 0.5."""
    raw = np.asarray(raw, dtype=np.float32)
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        return np.full_like(raw, 0.5)
    return (raw - lo) / (hi - lo)


def predict_depth(sample: StereoSample, depth_backend) -> DepthCondition:
    """Run the depth backend on both views; failures abort this sample only."""
    try:
        left = np.asarray(depth_backend.predict(sample.left), dtype=np.float32)
        right = np.asarray(depth_backend.predict(sample.right), dtype=np.float32)
    except Exception as exc:
        raise PipelineError(f"depth backend failed for sample {sample.id!r}: {exc}") from exc
    try:
        return DepthCondition(left=left, right=right)
    except ValueError as exc:
        raise PipelineError(f"depth backend returned invalid maps for {sample.id!r}: {exc}") from exc
