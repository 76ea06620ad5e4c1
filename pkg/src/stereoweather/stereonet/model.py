"""Toy stereo matcher: robust encoder -> correlation volume -> soft regression
-> recurrent refinement."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.types import StereoSample
from ..encoder.robust import DEFAULT_CHANNEL_PLAN, RobustEncoder
from .cost import correlation_volume, soft_argmin
from .loss import DisparityEstimate
from .refine import ResidualRefiner, upsample_disparity

CHECKPOINT_VERSION = 1


class StereoMatcher(nn.Module):
    def __init__(
        self,
        channel_plan: tuple[int, int, int, int] = DEFAULT_CHANNEL_PLAN,
        d_range: int = 48,
        iterations: int = 4,
        temperature: float = 0.05,
        context_channels: int = 16,
        hidden_channels: int = 32,
        seed: int | None = None,
    ):
        super().__init__()
        if seed is not None:
            torch.manual_seed(seed)
        self.d_range = d_range
        self.iterations = iterations
        self.temperature = temperature
        self.hparams = {
            "channel_plan": tuple(channel_plan),
            "d_range": d_range,
            "iterations": iterations,
            "temperature": temperature,
            "context_channels": context_channels,
            "hidden_channels": hidden_channels,
        }
        self.encoder = RobustEncoder(channel_plan)
        # context path: scales 8/16/32 projected and upsampled to the 1/4 grid
        _, c8, c16, c32 = channel_plan
        self.ctx8 = nn.Conv2d(c8, context_channels, 1)
        self.ctx16 = nn.Conv2d(c16, context_channels, 1)
        self.ctx32 = nn.Conv2d(c32, context_channels, 1)
        self.refiner = ResidualRefiner(3 * context_channels, hidden_channels)

    @property
    def d_full(self) -> int:
        """Full-resolution disparity bound (quarter-res range times 4)."""
        return 4 * self.d_range

    def _context(self, feats: dict[int, torch.Tensor]) -> torch.Tensor:
        target = feats[4].shape[2:]
        parts = [
            F.interpolate(self.ctx8(feats[8]), size=target, mode="bilinear", align_corners=False),
            F.interpolate(self.ctx16(feats[16]), size=target, mode="bilinear", align_corners=False),
            F.interpolate(self.ctx32(feats[32]), size=target, mode="bilinear", align_corners=False),
        ]
        return F.gelu(torch.cat(parts, dim=1))

    def forward(
        self, left: torch.Tensor, right: torch.Tensor
    ) -> tuple[torch.Tensor, list[torch.Tensor]]:
        """[B, 3, H, W] pair -> (initial [B, H, W], refined maps [B, H, W] x K)."""
        feats_l = self.encoder.feature_maps(left)
        feats_r = self.encoder.feature_maps(right)
        volume = correlation_volume(feats_l[4], feats_r[4], self.d_range)
        disp_q = soft_argmin(volume, self.temperature).unsqueeze(1)  # [B, 1, h, w]
        initial = upsample_disparity(disp_q)

        context = self._context(feats_l)
        hidden = self.refiner.init_hidden(context)
        refined = []
        for _ in range(self.iterations):
            disp_q, hidden = self.refiner(disp_q, context, hidden, float(self.d_range - 1))
            refined.append(upsample_disparity(disp_q).squeeze(1))
        return initial.squeeze(1), refined


def _pad_to_multiple(image: torch.Tensor, multiple: int = 32) -> tuple[torch.Tensor, int, int]:
    _, _, h, w = image.shape
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h or pad_w:
        image = F.pad(image, (0, pad_w, 0, pad_h), mode="replicate")
    return image, pad_h, pad_w


def estimate_disparity(model: StereoMatcher, sample: StereoSample) -> DisparityEstimate:
    """Run one sample (padding internally to a /32 grid) -> full-res estimate."""
    dtype = next(model.parameters()).dtype
    left = torch.from_numpy(np.ascontiguousarray(sample.left)).unsqueeze(0).to(dtype)
    right = torch.from_numpy(np.ascontiguousarray(sample.right)).unsqueeze(0).to(dtype)
    left, _, _ = _pad_to_multiple(left)
    right, _, _ = _pad_to_multiple(right)
    h, w = sample.height, sample.width
    model.eval()
    with torch.no_grad():
        initial, refined = model(left, right)
    return DisparityEstimate(
        initial=initial[0, :h, :w],
        refined=tuple(r[0, :h, :w] for r in refined),
    )


def predict(model: StereoMatcher, sample: StereoSample) -> np.ndarray:
    """Final refined disparity as float32 [H, W], >= 0."""
    est = estimate_disparity(model, sample)
    return est.final.numpy().astype(np.float32)


def save_matcher(model: StereoMatcher, path: str | Path) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_VERSION,
            "hparams": model.hparams,
            "state_dict": model.state_dict(),
            "artifact_map": model.encoder.denoiser.artifact_map,
        },
        path,
    )


def load_matcher(path: str | Path) -> StereoMatcher:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {blob.get('format_version')!r}")
    hp = blob["hparams"]
    model = StereoMatcher(
        channel_plan=tuple(hp["channel_plan"]),
        d_range=hp["d_range"],
        iterations=hp["iterations"],
        temperature=hp["temperature"],
        context_channels=hp["context_channels"],
        hidden_channels=hp["hidden_channels"],
    )
    model.load_state_dict(blob["state_dict"])
    model.encoder.denoiser.artifact_map = blob.get("artifact_map")
    return model
