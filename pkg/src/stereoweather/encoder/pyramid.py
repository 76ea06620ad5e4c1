"""Convolutional pyramid branch: features at strides 4, 8, 16.

A small stand-in for a pretrained backbone: four stride-2 stages with
bias-free convolutions and GELU (smooth, so finite-difference gradient
checks are well-posed), tapped after stages 2-4.
"""

from __future__ import annotations

import torch
import torch.nn as nn


def _stage(c_in: int, c_out: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, stride=2, padding=1, bias=False),
        nn.GELU(),
        nn.Conv2d(c_out, c_out, 3, stride=1, padding=1, bias=False),
        nn.GELU(),
    )


class ConvPyramid(nn.Module):
    def __init__(self, channels: tuple[int, int, int] = (32, 64, 96), stem_channels: int = 16):
        super().__init__()
        c4, c8, c16 = channels
        self.channels = channels
        self.stage1 = _stage(3, stem_channels)  # /2
        self.stage2 = _stage(stem_channels, c4)  # /4
        self.stage3 = _stage(c4, c8)  # /8
        self.stage4 = _stage(c8, c16)  # /16

    def forward(self, image: torch.Tensor) -> dict[int, torch.Tensor]:
        """image [B, 3, H, W] -> {4: [B,C4,H/4,W/4], 8: ..., 16: ...}."""
        x = self.stage1(image)
        f4 = self.stage2(x)
        f8 = self.stage3(f4)
        f16 = self.stage4(f8)
        return {4: f4, 8: f8, 16: f16}
