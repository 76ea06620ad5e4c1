"""Transformer branch with positional-artifact removal, producing f^(32).

Transformer token maps share a positional component across images (the
positional encoding leaks into the features); subtracting an estimate of that
shared component yields cleaner features. The estimate is the cross-image
mean of per-image-centered tokens, fit once over a feature batch and then
subtracted at inference.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn


def sinusoidal_grid_encoding(rows: int, cols: int, width: int, dtype=torch.float32) -> torch.Tensor:
    """Fixed 2D sin/cos positional encoding, [rows * cols, width]."""
    if width % 4 != 0:
        raise ValueError(f"encoding width must be divisible by 4, got {width}")
    quarter = width // 4
    freq = torch.exp(
        torch.arange(quarter, dtype=torch.float64) * (-math.log(10000.0) / max(quarter - 1, 1))
    )
    r = torch.arange(rows, dtype=torch.float64)[:, None] * freq[None, :]
    c = torch.arange(cols, dtype=torch.float64)[:, None] * freq[None, :]
    enc = torch.zeros(rows, cols, width, dtype=torch.float64)
    enc[..., 0:quarter] = torch.sin(r)[:, None, :]
    enc[..., quarter : 2 * quarter] = torch.cos(r)[:, None, :]
    enc[..., 2 * quarter : 3 * quarter] = torch.sin(c)[None, :, :]
    enc[..., 3 * quarter :] = torch.cos(c)[None, :, :]
    return enc.reshape(rows * cols, width).to(dtype)


class DenoiserModel(nn.Module):
    """Patch transformer at stride ``patch_size`` plus a fitted artifact map."""

    def __init__(
        self,
        token_width: int = 128,
        patch_size: int = 32,
        depth: int = 2,
        heads: int = 4,
    ):
        super().__init__()
        self.patch_size = patch_size
        self.token_width = token_width
        self.embed = nn.Conv2d(3, token_width, patch_size, stride=patch_size)
        layer = nn.TransformerEncoderLayer(
            d_model=token_width,
            nhead=heads,
            dim_feedforward=2 * token_width,
            dropout=0.0,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.blocks = nn.TransformerEncoder(layer, num_layers=depth, enable_nested_tensor=False)
        self.norm = nn.LayerNorm(token_width)
        # estimated shared positional artifact, [tokens, token_width]; None until fitted
        self.artifact_map: torch.Tensor | None = None

    def tokens(self, image: torch.Tensor) -> torch.Tensor:
        """Raw transformer tokens for [B, 3, H, W] -> [B, T, C]."""
        _, _, h, w = image.shape
        if h % self.patch_size or w % self.patch_size:
            raise ValueError(
                f"resolution {h}x{w} not divisible by patch size {self.patch_size}; "
                "pad the input first"
            )
        x = self.embed(image)  # [B, C, h/p, w/p]
        rows, cols = x.shape[2], x.shape[3]
        x = x.flatten(2).transpose(1, 2)  # [B, T, C]
        pos = sinusoidal_grid_encoding(rows, cols, self.token_width, dtype=x.dtype)
        x = x + pos.to(x.device)
        x = self.blocks(x)
        return self.norm(x)

    def denoised_tokens(self, images: torch.Tensor) -> torch.Tensor:
        """Tokens with the fitted artifact subtracted (no-op until fitted), [B, T, C]."""
        toks = self.tokens(images)
        if self.artifact_map is not None:
            if self.artifact_map.shape != toks.shape[1:]:
                raise ValueError(
                    f"artifact map was fitted for {tuple(self.artifact_map.shape)} tokens, "
                    f"input produces {tuple(toks.shape[1:])}"
                )
            toks = toks - self.artifact_map.to(toks.dtype)
        return toks

    def fit(self, images: torch.Tensor) -> torch.Tensor:
        """Fit the artifact map from a batch of images; returns it."""
        with torch.no_grad():
            feats = self.tokens(images)
        self.artifact_map = fit_artifact_map(feats)
        return self.artifact_map


def fit_artifact_map(features: torch.Tensor) -> torch.Tensor:
    """Shared positional component of a feature batch [B, T, C] -> [T, C].

    Per image, tokens are centered by their across-token mean; the artifact
    estimate is the per-position mean of those centered tokens over images.
    """
    if features.ndim != 3:
        raise ValueError(f"expected [B, T, C] features, got {tuple(features.shape)}")
    if features.shape[0] < 2:
        raise ValueError("fitting the artifact map needs at least 2 images")
    centered = features - features.mean(dim=1, keepdim=True)
    return centered.mean(dim=0)


def extract_denoised(image: torch.Tensor, model: DenoiserModel) -> torch.Tensor:
    """f^(32) for one [3, H, W] image: artifact-subtracted tokens on the grid."""
    if image.ndim != 3:
        raise ValueError(f"expected [3, H, W], got {tuple(image.shape)}")
    _, h, w = image.shape
    rows, cols = h // model.patch_size, w // model.patch_size
    toks = model.denoised_tokens(image.unsqueeze(0))[0]  # [T, C]
    return toks.transpose(0, 1).reshape(model.token_width, rows, cols)
