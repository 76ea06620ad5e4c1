from .cost import CostVolume, build_cost_volume, correlation_volume, soft_argmin
from .loss import DisparityEstimate, l1_loss, weighted_l1
from .model import (
    StereoMatcher,
    estimate_disparity,
    load_matcher,
    predict,
    save_matcher,
)
from .refine import ResidualRefiner, upsample_disparity
from .train import TrainConfig, batch_tensors, build_model, train, train_step

__all__ = [
    "CostVolume",
    "DisparityEstimate",
    "ResidualRefiner",
    "StereoMatcher",
    "TrainConfig",
    "batch_tensors",
    "build_cost_volume",
    "build_model",
    "correlation_volume",
    "estimate_disparity",
    "l1_loss",
    "load_matcher",
    "predict",
    "save_matcher",
    "soft_argmin",
    "train",
    "train_step",
    "upsample_disparity",
    "weighted_l1",
]
