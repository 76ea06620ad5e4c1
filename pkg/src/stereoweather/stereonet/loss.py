"""Exponentially weighted multi-iteration L1 disparity loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch


@dataclass(frozen=True)
class DisparityEstimate:
    """Full-resolution initial disparity plus one refined map per iteration."""

    initial: torch.Tensor  # [H, W]
    refined: tuple[torch.Tensor, ...]  # K maps, [H, W] each

    def __post_init__(self) -> None:
        for name, t in [("initial", self.initial), *[(f"refined[{i}]", r) for i, r in enumerate(self.refined)]]:
            if not torch.isfinite(t).all():
                raise ValueError(f"{name} contains non-finite values")
            if (t < 0).any():
                raise ValueError(f"{name} contains negative disparities")

    @property
    def iterations(self) -> int:
        return len(self.refined)

    @property
    def final(self) -> torch.Tensor:
        return self.refined[-1] if self.refined else self.initial


def _masked_l1(pred: torch.Tensor, gt: torch.Tensor, valid: torch.Tensor) -> torch.Tensor:
    return (pred - gt).abs()[valid].mean()


def weighted_l1(
    initial: torch.Tensor,
    refined: Sequence[torch.Tensor],
    gt: torch.Tensor,
    valid_mask: torch.Tensor,
    gamma: float = 0.9,
) -> torch.Tensor:
    """sum_k gamma^(K-k) * L1(refined_k) + gamma^(K+1) * L1(initial), means over valid pixels.

    Works batched or unbatched as long as all maps share the gt/mask shape.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if initial.shape != gt.shape or valid_mask.shape != gt.shape:
        raise ValueError(
            f"shape mismatch: initial {tuple(initial.shape)}, gt {tuple(gt.shape)}, "
            f"mask {tuple(valid_mask.shape)}"
        )
    if not valid_mask.any():
        raise ValueError("loss undefined: valid mask is empty")
    k_total = len(refined)
    loss = (gamma ** (k_total + 1)) * _masked_l1(initial, gt, valid_mask)
    for idx, pred in enumerate(refined):  # idx 0 is iteration 1
        if pred.shape != gt.shape:
            raise ValueError(f"refined[{idx}] shape {tuple(pred.shape)} != gt {tuple(gt.shape)}")
        loss = loss + (gamma ** (k_total - (idx + 1))) * _masked_l1(pred, gt, valid_mask)
    return loss


def l1_loss(
    estimate: DisparityEstimate,
    gt: torch.Tensor,
    valid_mask: torch.Tensor,
    gamma: float = 0.9,
) -> torch.Tensor:
    return weighted_l1(estimate.initial, estimate.refined, gt, valid_mask, gamma)
