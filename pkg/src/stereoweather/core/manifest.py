"""Dataset directory scanning and sample loading.

Layout per split::

    <root>/<split>/left/<id>.png
    <root>/<split>/right/<id>.png
    <root>/<split>/disp/<id>.pfm
    <root>/<split>/subsets.json     # optional {id: label}

Missing ground truth is encoded on disk as disparity <= 0 (PFM carries no
mask channel); loading derives ``valid_mask = finite & (disp > 0)``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from ..errors import ManifestError
from .pfm import read_pfm
from .types import DEFAULT_SUBSET_LABELS, DatasetManifest, ManifestEntry, StereoSample

IMAGE_EXT = ".png"
DISP_EXT = ".pfm"


def load_manifest(
    root: str | Path,
    split: str,
    allowed_labels: Iterable[str] = DEFAULT_SUBSET_LABELS,
    default_label: str = "normal",
) -> DatasetManifest:
    """Scan a dataset split into a manifest with lexicographically sorted ids."""
    root = Path(root)
    split_dir = root / split
    left_dir = split_dir / "left"
    right_dir = split_dir / "right"
    disp_dir = split_dir / "disp"
    for d in (left_dir, right_dir, disp_dir):
        if not d.is_dir():
            raise ManifestError(f"missing dataset subdirectory: {d}")

    left_ids = {p.stem for p in left_dir.glob(f"*{IMAGE_EXT}")}
    right_ids = {p.stem for p in right_dir.glob(f"*{IMAGE_EXT}")}
    disp_ids = {p.stem for p in disp_dir.glob(f"*{DISP_EXT}")}

    complete = left_ids & right_ids & disp_ids
    incomplete = (left_ids | right_ids | disp_ids) - complete
    if incomplete:
        raise ManifestError(
            f"{split_dir}: ids missing from one or more of left/right/disp: "
            + ", ".join(sorted(incomplete))
        )

    labels: dict[str, str] = {}
    subsets_path = split_dir / "subsets.json"
    if subsets_path.exists():
        labels = json.loads(subsets_path.read_text())
        if not isinstance(labels, dict):
            raise ManifestError(f"{subsets_path}: expected a flat id->label object")

    allowed = set(allowed_labels)
    entries = []
    for sample_id in sorted(complete):
        label = labels.get(sample_id, default_label)
        if label not in allowed:
            raise ManifestError(
                f"{split_dir}: id {sample_id!r} has unknown subset label {label!r}"
            )
        entries.append(
            ManifestEntry(
                id=sample_id,
                left_path=left_dir / f"{sample_id}{IMAGE_EXT}",
                right_path=right_dir / f"{sample_id}{IMAGE_EXT}",
                disparity_path=disp_dir / f"{sample_id}{DISP_EXT}",
                subset_label=label,
            )
        )
    return DatasetManifest(root=root, split=split, entries=tuple(entries))


def read_image(path: str | Path) -> np.ndarray:
    """Decode an image to [3, H, W] float32 in [0, 1]."""
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return np.ascontiguousarray(rgb.transpose(2, 0, 1))


def write_image(image: np.ndarray, path: str | Path) -> None:
    """Save a [3, H, W] float image in [0, 1] as 8-bit PNG."""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"expected [3, H, W], got {image.shape}")
    arr = np.clip(image, 0.0, 1.0)
    as_u8 = np.round(arr * 255.0).astype(np.uint8).transpose(1, 2, 0)
    Image.fromarray(as_u8, mode="RGB").save(path)


def valid_mask_from_disparity(disparity: np.ndarray) -> np.ndarray:
    return np.isfinite(disparity) & (disparity > 0)


def load_sample(entry: ManifestEntry) -> StereoSample:
    """Load and validate one manifest entry as a StereoSample."""
    left = read_image(entry.left_path)
    right = read_image(entry.right_path)
    disparity = read_pfm(entry.disparity_path).data
    return StereoSample(
        left=left,
        right=right,
        disparity=disparity,
        valid_mask=valid_mask_from_disparity(disparity),
        id=entry.id,
    )
