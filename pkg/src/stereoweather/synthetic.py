"""Synthetic stereo pairs with exactly known disparity, for tests and overfit runs.

Scenes are continuous band-limited textures (sums of seeded sinusoids), so the
right view can be sampled at the exact sub-pixel positions the disparity field
dictates instead of being interpolated. Pixels whose right-view correspondence
falls outside the image are masked invalid (encoded as disparity 0 on disk,
matching the loader's valid = finite & > 0 convention).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

import numpy as np

from .core.manifest import load_manifest, write_image
from .core.pfm import write_pfm
from .core.types import DatasetManifest

PATTERNS = ("constant", "gradient", "blocky")


def _texture_sampler(rng: np.random.Generator, components: int = 8) -> Callable:
    amps = rng.uniform(0.5, 1.0, size=(3, components))
    amps = 0.45 * amps / amps.sum(axis=1, keepdims=True)  # values stay inside [0.05, 0.95]
    freq_x = rng.uniform(0.02, 0.25, size=(3, components))
    freq_y = rng.uniform(0.02, 0.25, size=(3, components))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(3, components))

    def sample(y: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Evaluate the texture at continuous (y, u) grids -> [3, H, W]."""
        out = np.empty((3,) + y.shape, dtype=np.float64)
        for c in range(3):
            acc = np.full(y.shape, 0.5, dtype=np.float64)
            for i in range(components):
                acc += amps[c, i] * np.sin(
                    2.0 * np.pi * (freq_x[c, i] * u + freq_y[c, i] * y) + phase[c, i]
                )
            out[c] = acc
        return out.astype(np.float32)

    return sample


def _disparity_field(
    pattern: str, height: int, width: int, max_disparity: float, rng: np.random.Generator
) -> np.ndarray:
    x = np.arange(width, dtype=np.float64)[None, :].repeat(height, axis=0)
    if pattern == "constant":
        value = float(rng.integers(4, int(max_disparity) + 1))
        return np.full((height, width), value)
    if pattern == "gradient":
        return max_disparity * x / (width - 1)
    if pattern == "blocky":
        bands = max(2, height // 24)
        levels = rng.integers(2, int(max_disparity) + 1, size=bands).astype(np.float64)
        rows = np.minimum(np.arange(height) * bands // height, bands - 1)
        return levels[rows][:, None].repeat(width, axis=1)
    raise ValueError(f"unknown disparity pattern {pattern!r}, expected one of {PATTERNS}")


def _right_view_positions(pattern: str, disparity: np.ndarray) -> np.ndarray:
    """Texture coordinate u for each right-view pixel x, solving u - D(u) = x."""
    height, width = disparity.shape
    x = np.arange(width, dtype=np.float64)[None, :].repeat(height, axis=0)
    if pattern == "gradient":
        slope = disparity[0, -1] / (width - 1)  # D(u) = slope * u
        return x / (1.0 - slope)
    # constant and blocky are per-row constant: u = x + d(row)
    return x + disparity


def render_pair(
    pattern: str, height: int, width: int, max_disparity: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(left, right, disparity, valid) for one synthetic scene."""
    texture = _texture_sampler(rng)
    disparity = _disparity_field(pattern, height, width, max_disparity, rng)
    y = np.arange(height, dtype=np.float64)[:, None].repeat(width, axis=1)
    x = np.arange(width, dtype=np.float64)[None, :].repeat(height, axis=0)

    left = texture(y, x)
    right = texture(y, _right_view_positions(pattern, disparity))
    valid = (x - disparity) >= 0.0  # correspondence must land inside the right image
    return left, right, disparity.astype(np.float32), valid


def make_synthetic(
    out_root: str | Path,
    count: int,
    resolution: tuple[int, int],
    disparity_pattern: str,
    split: str = "train",
    seed: int = 0,
    max_disparity: float = 16.0,
) -> DatasetManifest:
    """Build a dataset tree of warped-texture pairs with exact ground truth.

    ``disparity_pattern`` is one pattern name or a comma list cycled across
    samples (e.g. ``"constant,gradient"``). Resolution must divide by 32 so
    the pairs feed the encoder without padding.
    """
    height, width = resolution
    if height % 32 or width % 32:
        raise ValueError(f"resolution {height}x{width} must be divisible by 32")
    patterns = tuple(p.strip() for p in disparity_pattern.split(","))
    for p in patterns:
        if p not in PATTERNS:
            raise ValueError(f"unknown disparity pattern {p!r}, expected one of {PATTERNS}")

    split_dir = Path(out_root) / split
    dirs = {name: split_dir / name for name in ("left", "right", "disp")}
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)

    labels: dict[str, str] = {}
    for idx in range(count):
        pattern = patterns[idx % len(patterns)]
        rng = np.random.default_rng([seed, idx])
        left, right, disparity, valid = render_pair(pattern, height, width, max_disparity, rng)
        disk_disp = np.where(valid, disparity, np.float32(0.0))

        sample_id = f"{idx:04d}_{pattern}"
        write_image(left, dirs["left"] / f"{sample_id}.png")
        write_image(right, dirs["right"] / f"{sample_id}.png")
        write_pfm(disk_disp, dirs["disp"] / f"{sample_id}.pfm")
        labels[sample_id] = "normal"

    (split_dir / "subsets.json").write_text(
        json.dumps(dict(sorted(labels.items())), indent=2, sort_keys=True) + "\n"
    )
    return load_manifest(out_root, split)
