from .manifest import (
    load_manifest,
    load_sample,
    read_image,
    valid_mask_from_disparity,
    write_image,
)
from .pfm import PfmImage, read_pfm, write_pfm
from .types import DEFAULT_SUBSET_LABELS, DatasetManifest, ManifestEntry, StereoSample

__all__ = [
    "DEFAULT_SUBSET_LABELS",
    "DatasetManifest",
    "ManifestEntry",
    "PfmImage",
    "StereoSample",
    "load_manifest",
    "load_sample",
    "read_image",
    "read_pfm",
    "valid_mask_from_disparity",
    "write_image",
    "write_pfm",
]
