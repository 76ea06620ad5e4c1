"""Generation pipeline configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

SCHEDULERS = ("ddim",)


@dataclass(frozen=True)
class DfmSettings:
    """Cross-view consistency settings (config keys ``dfm.*``)."""

    n: int = 32
    alpha: float = 0.5
    d_max: float = 192.0
    layer_selector: str = "*"
    timestep_range: Optional[Tuple[int, int]] = None  # [lo, hi) steps; None = all

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("dfm.n must be non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("dfm.alpha must lie in [0, 1]")
        if self.d_max <= 0:
            raise ValueError("dfm.d_max must be positive")


@dataclass(frozen=True)
class BackendIds:
    diffusion: str = "mock-diffusion"
    depth: str = "mock-depth"
    prompt: str = "mock-prompt"


@dataclass(frozen=True)
class GenerationConfig:
    steps: int = 50
    scheduler: str = "ddim"
    guidance_scale: float = 7.5
    seed: int = 0
    conditioning_scale: float = 1.0
    dfm: DfmSettings = field(default_factory=DfmSettings)
    backends: BackendIds = field(default_factory=BackendIds)
    endpoints: dict = field(default_factory=dict)  # backend id -> URL for remote adapters
    workers: int = 1

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"scheduler must be one of {SCHEDULERS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "GenerationConfig":
        doc = dict(doc)
        known = {
            "steps",
            "scheduler",
            "guidance_scale",
            "seed",
            "conditioning_scale",
            "dfm",
            "backends",
            "endpoints",
            "workers",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown generation config keys: {sorted(unknown)}")
        if "dfm" in doc:
            dfm = dict(doc["dfm"])
            if "timestep_range" in dfm and dfm["timestep_range"] is not None:
                dfm["timestep_range"] = tuple(dfm["timestep_range"])
            unknown = set(dfm) - {"n", "alpha", "d_max", "layer_selector", "timestep_range"}
            if unknown:
                raise ValueError(f"unknown dfm config keys: {sorted(unknown)}")
            doc["dfm"] = DfmSettings(**dfm)
        if "backends" in doc:
            doc["backends"] = BackendIds(**doc["backends"])
        return cls(**doc)
