from .backends import (
    BackendClients,
    MockDepthBackend,
    MockDiffusionBackend,
    MockPromptBackend,
    build_backends,
    mock_style_transfer,
)
from .config import BackendIds, DfmSettings, GenerationConfig
from .depth import DepthCondition, normalize_depth, predict_depth
from .pipeline import GeneratedPair, GenerationReport, generate_pair, run_pipeline, stable_seed
from .prompts import CONDITIONS, TEMPLATE_KEYWORDS, WeatherPrompt, build_weather_prompt

__all__ = [
    "CONDITIONS",
    "TEMPLATE_KEYWORDS",
    "BackendClients",
    "BackendIds",
    "DepthCondition",
    "DfmSettings",
    "GeneratedPair",
    "GenerationConfig",
    "GenerationReport",
    "MockDepthBackend",
    "MockDiffusionBackend",
    "MockPromptBackend",
    "WeatherPrompt",
    "build_backends",
    "build_weather_prompt",
    "generate_pair",
    "mock_style_transfer",
    "normalize_depth",
    "predict_depth",
    "run_pipeline",
    "stable_seed",
]
