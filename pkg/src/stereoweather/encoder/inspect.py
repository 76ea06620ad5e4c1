"""Feature inspection: per-scale statistics and PCA projection images."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .robust import FeaturePyramid


def feature_statistics(pyramid: FeaturePyramid) -> dict[int, dict[str, float | list[int]]]:
    stats: dict[int, dict[str, float | list[int]]] = {}
    for scale in pyramid.scales:
        f = pyramid[scale]
        stats[scale] = {
            "shape": list(f.shape),
            "mean": float(f.mean()),
            "std": float(f.std()),
            "min": float(f.min()),
            "max": float(f.max()),
        }
    return stats


def pca_projection(feature_map: torch.Tensor, components: int = 3) -> np.ndarray:
    """Project [C, h, w] features onto their top principal components -> [h, w, k] in [0, 1]."""
    c, h, w = feature_map.shape
    flat = feature_map.detach().double().reshape(c, h * w).T.numpy()  # [hw, C]
    flat = flat - flat.mean(axis=0, keepdims=True)
    k = min(components, c, flat.shape[0])
    _, _, vt = np.linalg.svd(flat, full_matrices=False)
    proj = flat @ vt[:k].T  # [hw, k]
    lo, hi = proj.min(axis=0, keepdims=True), proj.max(axis=0, keepdims=True)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    normed = (proj - lo) / span
    if k < components:  # pad so the output is always renderable as RGB
        normed = np.concatenate([normed, np.zeros((normed.shape[0], components - k))], axis=1)
    return normed.reshape(h, w, components)


def save_pca_image(feature_map: torch.Tensor, path: str | Path, upscale: int = 1) -> None:
    rgb = (pca_projection(feature_map) * 255.0).round().astype(np.uint8)
    img = Image.fromarray(rgb, mode="RGB")
    if upscale > 1:
        img = img.resize((img.width * upscale, img.height * upscale), Image.NEAREST)
    img.save(path)
