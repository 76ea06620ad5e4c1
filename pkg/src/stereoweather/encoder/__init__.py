from .denoiser import DenoiserModel, extract_denoised, fit_artifact_map, sinusoidal_grid_encoding
from .inspect import feature_statistics, pca_projection, save_pca_image
from .pyramid import ConvPyramid
from .robust import (
    DEFAULT_CHANNEL_PLAN,
    FeaturePyramid,
    RobustEncoder,
    encode_pair,
    load_encoder,
    require_divisible,
    save_encoder,
)

__all__ = [
    "DEFAULT_CHANNEL_PLAN",
    "ConvPyramid",
    "DenoiserModel",
    "FeaturePyramid",
    "RobustEncoder",
    "encode_pair",
    "extract_denoised",
    "feature_statistics",
    "fit_artifact_map",
    "load_encoder",
    "pca_projection",
    "require_divisible",
    "save_encoder",
    "save_pca_image",
    "sinusoidal_grid_encoding",
]
