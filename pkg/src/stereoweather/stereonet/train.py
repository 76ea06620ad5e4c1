"""Training loop for the toy matcher."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import torch

from ..core.types import StereoSample
from ..errors import TrainingError
from .loss import weighted_l1
from .model import StereoMatcher


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    steps: int = 200
    batch_size: int = 2
    K: int = 4  # refinement iterations
    D: int = 48  # quarter-resolution disparity range
    gamma: float = 0.9
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def batch_tensors(
    samples: Sequence[StereoSample], dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Stack same-resolution samples into (left, right, gt, valid) tensors."""
    if not samples:
        raise ValueError("batch must be nonempty")
    shapes = {s.left.shape for s in samples}
    if len(shapes) != 1:
        raise ValueError(f"batch mixes resolutions: {sorted(shapes)}")
    left = torch.from_numpy(np.stack([s.left for s in samples])).to(dtype)
    right = torch.from_numpy(np.stack([s.right for s in samples])).to(dtype)
    gt = torch.from_numpy(np.stack([s.disparity for s in samples])).to(dtype)
    valid = torch.from_numpy(np.stack([s.valid_mask for s in samples]))
    return left, right, gt, valid


def train_step(
    model: StereoMatcher,
    batch: Sequence[StereoSample],
    optimizer: torch.optim.Optimizer,
    gamma: float = 0.9,
) -> float:
    """One gradient step; returns the (finite) loss value."""
    left, right, gt, valid = batch_tensors(batch, next(model.parameters()).dtype)
    if left.shape[2] % 32 or left.shape[3] % 32:
        raise ValueError("training resolutions must be divisible by 32")
    model.train()
    optimizer.zero_grad()
    initial, refined = model(left, right)
    loss = weighted_l1(initial, refined, gt, valid, gamma)
    if not torch.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss.item()!r}; training aborted")
    loss.backward()
    optimizer.step()
    return float(loss.detach())


def train(
    model: StereoMatcher,
    samples: Sequence[StereoSample],
    cfg: TrainConfig,
) -> list[float]:
    """Train on a fixed sample set; returns the per-step loss history."""
    if not samples:
        raise ValueError("no training samples")
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    history = []
    for _ in range(cfg.steps):
        idx = rng.choice(len(samples), size=min(cfg.batch_size, len(samples)), replace=False)
        history.append(train_step(model, [samples[i] for i in idx], optimizer, cfg.gamma))
    return history


def build_model(cfg: TrainConfig, **overrides) -> StereoMatcher:
    return StereoMatcher(d_range=cfg.D, iterations=cfg.K, seed=cfg.seed, **overrides)
