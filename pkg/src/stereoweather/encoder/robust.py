"""The full robust encoder: conv pyramid + denoising transformer branch."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import torch
import torch.nn as nn

from ..core.types import StereoSample
from .denoiser import DenoiserModel, extract_denoised
from .pyramid import ConvPyramid

PYRAMID_SCALES = (4, 8, 16, 32)
DEFAULT_CHANNEL_PLAN = (32, 64, 96, 128)
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class FeaturePyramid:
    """Scale-indexed feature maps {i: [C_i, H/i, W/i]} for i in {4, 8, 16, 32}."""

    maps: Mapping[int, torch.Tensor]

    def __post_init__(self) -> None:
        missing = set(PYRAMID_SCALES) - set(self.maps)
        if missing:
            raise ValueError(f"pyramid is missing scales {sorted(missing)}")
        for scale, t in self.maps.items():
            if t.ndim != 3:
                raise ValueError(f"scale {scale} must be [C, H/{scale}, W/{scale}]")
            if not torch.isfinite(t).all():
                raise ValueError(f"scale {scale} features are not finite")

    def __getitem__(self, scale: int) -> torch.Tensor:
        return self.maps[scale]

    @property
    def scales(self) -> tuple[int, ...]:
        return PYRAMID_SCALES


def require_divisible(h: int, w: int, by: int = 32) -> None:
    if h % by or w % by:
        raise ValueError(
            f"resolution {h}x{w} must be divisible by {by}; pad with edge "
            "replication and crop the outputs"
        )


class RobustEncoder(nn.Module):
    def __init__(self, channel_plan: tuple[int, int, int, int] = DEFAULT_CHANNEL_PLAN, seed: int | None = None):
        super().__init__()
        if seed is not None:
            torch.manual_seed(seed)
        self.channel_plan = tuple(channel_plan)
        self.conv = ConvPyramid(channels=self.channel_plan[:3])
        self.denoiser = DenoiserModel(token_width=self.channel_plan[3])

    def extract_pyramid(self, image: torch.Tensor) -> dict[int, torch.Tensor]:
        """Conv-branch features for one [3, H, W] image: scales 4, 8, 16."""
        if image.ndim != 3 or image.shape[0] != 3:
            raise ValueError(f"expected [3, H, W], got {tuple(image.shape)}")
        require_divisible(image.shape[1], image.shape[2])
        feats = self.conv(image.unsqueeze(0))
        return {scale: f[0] for scale, f in feats.items()}

    def feature_maps(self, images: torch.Tensor) -> dict[int, torch.Tensor]:
        """Batched features for [B, 3, H, W]: all four scales as [B, C_i, H/i, W/i]."""
        if images.ndim != 4 or images.shape[1] != 3:
            raise ValueError(f"expected [B, 3, H, W], got {tuple(images.shape)}")
        b, _, h, w = images.shape
        require_divisible(h, w)
        maps = self.conv(images)
        toks = self.denoiser.denoised_tokens(images)  # [B, T, C32]
        rows, cols = h // self.denoiser.patch_size, w // self.denoiser.patch_size
        maps[32] = toks.transpose(1, 2).reshape(b, self.channel_plan[3], rows, cols)
        return maps

    def forward(self, image: torch.Tensor) -> FeaturePyramid:
        maps = self.extract_pyramid(image)
        maps[32] = extract_denoised(image, self.denoiser)
        return FeaturePyramid(maps=maps)


def encode_pair(encoder: RobustEncoder, sample: StereoSample) -> tuple[FeaturePyramid, FeaturePyramid]:
    """Encode both views with the same (shared) weights."""
    left = torch.from_numpy(np.ascontiguousarray(sample.left))
    right = torch.from_numpy(np.ascontiguousarray(sample.right))
    dtype = next(encoder.parameters()).dtype
    return encoder(left.to(dtype)), encoder(right.to(dtype))


def save_encoder(encoder: RobustEncoder, path: str | Path) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_VERSION,
            "channel_plan": encoder.channel_plan,
            "state_dict": encoder.state_dict(),
            "artifact_map": encoder.denoiser.artifact_map,
        },
        path,
    )


def load_encoder(path: str | Path) -> RobustEncoder:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(
            f"unsupported encoder checkpoint version {blob.get('format_version')!r}"
        )
    encoder = RobustEncoder(channel_plan=tuple(blob["channel_plan"]))
    encoder.load_state_dict(blob["state_dict"])
    encoder.denoiser.artifact_map = blob.get("artifact_map")
    return encoder
