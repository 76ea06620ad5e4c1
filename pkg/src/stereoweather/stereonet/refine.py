"""Minimal recurrent residual refiner operating at quarter resolution."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


def upsample_disparity(disp_q: torch.Tensor, factor: int = 4) -> torch.Tensor:
    """[B, 1, h, w] quarter-res disparity -> [B, 1, h*f, w*f], values scaled by f."""
    up = F.interpolate(disp_q, scale_factor=factor, mode="bilinear", align_corners=False)
    return up * factor


class ResidualRefiner(nn.Module):
    """Hidden-state refiner: each step emits a clamped residual disparity update."""

    def __init__(self, context_channels: int, hidden_channels: int = 32):
        super().__init__()
        self.hidden_channels = hidden_channels
        self.update = nn.Conv2d(
            hidden_channels + context_channels + 1, hidden_channels, 3, padding=1
        )
        self.head = nn.Conv2d(hidden_channels, 1, 3, padding=1)

    def init_hidden(self, context: torch.Tensor) -> torch.Tensor:
        b, _, h, w = context.shape
        return context.new_zeros(b, self.hidden_channels, h, w)

    def forward(
        self,
        disp_q: torch.Tensor,  # [B, 1, h, w]
        context: torch.Tensor,  # [B, Cc, h, w]
        hidden: torch.Tensor,
        d_max_q: float,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        x = torch.cat([hidden, context, disp_q / d_max_q], dim=1)
        hidden = torch.tanh(self.update(x))
        delta = self.head(hidden)
        disp_q = torch.clamp(disp_q + delta, 0.0, d_max_q)
        return disp_q, hidden
