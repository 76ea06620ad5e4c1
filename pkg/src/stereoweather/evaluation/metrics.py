"""Per-frame disparity metrics: EPE and the D1 outlier rate."""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError

D1_ABS_THRESHOLD = 3.0  # pixels
D1_REL_THRESHOLD = 0.05  # fraction of ground truth


def _check_inputs(pred: np.ndarray, gt: np.ndarray, valid_mask: np.ndarray) -> None:
    if pred.shape != gt.shape or valid_mask.shape != gt.shape:
        raise ValueError(
            f"shape mismatch: pred {pred.shape}, gt {gt.shape}, mask {valid_mask.shape}"
        )
    if not valid_mask.any():
        raise EvaluationError("no valid pixels; frame must be excluded")


def epe(pred: np.ndarray, gt: np.ndarray, valid_mask: np.ndarray) -> float:
    """Mean absolute disparity error over valid pixels, in pixels."""
    _check_inputs(pred, gt, valid_mask)
    diff = np.abs(pred.astype(np.float64) - gt.astype(np.float64))
    return float(diff[valid_mask].mean())


def d1(pred: np.ndarray, gt: np.ndarray, valid_mask: np.ndarray, mode: str = "and") -> float:
    """Percentage of valid pixels whose error exceeds 3 px and/or 5% of gt.

    ``mode="and"`` is the established benchmark convention (both thresholds
    must be exceeded); ``mode="or"`` counts a pixel that exceeds either.
    """
    if mode not in ("and", "or"):
        raise ValueError(f"mode must be 'and' or 'or', got {mode!r}")
    _check_inputs(pred, gt, valid_mask)
    err = np.abs(pred.astype(np.float64) - gt.astype(np.float64))[valid_mask]
    gt_valid = gt.astype(np.float64)[valid_mask]
    over_abs = err > D1_ABS_THRESHOLD
    over_rel = err > D1_REL_THRESHOLD * gt_valid
    outliers = (over_abs & over_rel) if mode == "and" else (over_abs | over_rel)
    return float(100.0 * outliers.mean())
