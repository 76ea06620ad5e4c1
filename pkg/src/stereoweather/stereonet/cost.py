"""Correlation cost volume and soft-argmin disparity regression."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

_NORM_EPS = 1e-8
OUT_OF_RANGE_COST = -1.0


@dataclass(frozen=True)
class CostVolume:
    """Matching costs [D, H/4, W/4]; cost[d, y, x] correlates left (y, x) with right (y, x-d)."""

    data: torch.Tensor
    d_range: int

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[0] != self.d_range:
            raise ValueError(
                f"cost volume must be [{self.d_range}, h, w], got {tuple(self.data.shape)}"
            )
        if self.d_range < 1:
            raise ValueError("d_range must be >= 1")


def correlation_volume(f_left: torch.Tensor, f_right: torch.Tensor, d_range: int) -> torch.Tensor:
    """Batched normalized-correlation volume: [B, C, h, w] x2 -> [B, D, h, w]."""
    if f_left.shape != f_right.shape:
        raise ValueError(f"feature shapes differ: {f_left.shape} vs {f_right.shape}")
    b, _, h, w = f_left.shape
    if d_range > w:
        raise ValueError(f"d_range {d_range} exceeds feature width {w}")
    ln = F.normalize(f_left, dim=1, eps=_NORM_EPS)
    rn = F.normalize(f_right, dim=1, eps=_NORM_EPS)
    vol = f_left.new_full((b, d_range, h, w), OUT_OF_RANGE_COST)
    for d in range(d_range):
        if d == 0:
            vol[:, 0] = (ln * rn).sum(dim=1)
        else:
            vol[:, d, :, d:] = (ln[..., d:] * rn[..., :-d]).sum(dim=1)
    return vol


def build_cost_volume(f_left: torch.Tensor, f_right: torch.Tensor, d_range: int) -> CostVolume:
    """Unbatched [C, h, w] variant returning the CostVolume record."""
    if f_left.ndim != 3:
        raise ValueError(f"expected [C, h, w] features, got {tuple(f_left.shape)}")
    vol = correlation_volume(f_left.unsqueeze(0), f_right.unsqueeze(0), d_range)
    return CostVolume(data=vol[0], d_range=d_range)


def soft_argmin(volume: CostVolume | torch.Tensor, temperature: float = 0.05) -> torch.Tensor:
    """Softmax-weighted expected disparity over the cost axis.

    Accepts [D, h, w] or batched [B, D, h, w]; higher cost = better match, so
    this is a soft argmax over similarity (the classic soft-argmin when costs
    are negated distances). Output values lie in [0, D - 1].
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    data = volume.data if isinstance(volume, CostVolume) else volume
    d_axis = 0 if data.ndim == 3 else 1
    d_range = data.shape[d_axis]
    weights = torch.softmax(data / temperature, dim=d_axis)
    candidates = torch.arange(d_range, dtype=data.dtype, device=data.device)
    if d_axis == 0:
        return (weights * candidates[:, None, None]).sum(dim=0)
    return (weights * candidates[None, :, None, None]).sum(dim=1)
