from __future__ import annotations

import numpy as np
import pytest

from stereoweather.core.manifest import write_image
from stereoweather.core.pfm import write_pfm
from stereoweather.core.types import StereoSample


def random_sample(rng: np.random.Generator, height: int = 64, width: int = 96,
                  sample_id: str = "s") -> StereoSample:
    disparity = rng.uniform(0.5, 20.0, size=(height, width)).astype(np.float32)
    valid = rng.random((height, width)) > 0.2
    return StereoSample(
        left=rng.random((3, height, width), dtype=np.float32),
        right=rng.random((3, height, width), dtype=np.float32),
        disparity=disparity,
        valid_mask=valid,
        id=sample_id,
    )


def write_dataset_tree(root, split, samples):
    """Materialize StereoSamples as a core-layout dataset tree."""
    split_dir = root / split
    for name in ("left", "right", "disp"):
        (split_dir / name).mkdir(parents=True, exist_ok=True)
    for sample in samples:
        write_image(sample.left, split_dir / "left" / f"{sample.id}.png")
        write_image(sample.right, split_dir / "right" / f"{sample.id}.png")
        disk = np.where(sample.valid_mask, sample.disparity, np.float32(0.0))
        write_pfm(disk, split_dir / "disp" / f"{sample.id}.pfm")
    return split_dir


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
