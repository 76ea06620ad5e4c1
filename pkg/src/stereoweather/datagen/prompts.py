"""Weather prompt construction with a guaranteed template fallback."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

CONDITIONS = ("rainy", "foggy", "snowy", "cloudy", "sunny")

# Per-condition keyword templates used whenever the prompt backend is
# unavailable; the rainy row doubles as the canonical example list.
TEMPLATE_KEYWORDS: dict[str, tuple[str, ...]] = {
    "rainy": ("rainy", "dark clouds", "wet pavement", "raindrops", "reflections", "misty air"),
    "foggy": ("foggy", "dense fog", "low visibility", "gray haze", "diffused light", "muted colors"),
    "snowy": ("snowy", "falling snow", "snow-covered road", "overcast sky", "cold light", "white drifts"),
    "cloudy": ("cloudy", "overcast sky", "gray clouds", "soft shadows", "flat light", "dim streets"),
    "sunny": ("sunny", "clear sky", "bright sunlight", "sharp shadows", "high contrast", "warm tones"),
}


@dataclass(frozen=True)
class WeatherPrompt:
    condition: str
    keywords: tuple[str, ...]
    source: str  # "llm" | "template"

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}, expected one of {CONDITIONS}")
        if not self.keywords:
            raise ValueError("keywords must be nonempty")
        if self.source not in ("llm", "template"):
            raise ValueError(f"source must be 'llm' or 'template', got {self.source!r}")

    def text(self) -> str:
        return ", ".join(self.keywords)


def build_weather_prompt(sample, condition: str, prompt_backend) -> WeatherPrompt:
    """Ask the backend for keywords; fall back to the template table on any failure.

    Never raises for backend trouble: the fallback makes prompt construction
    total. An unknown condition is still a caller error.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}, expected one of {CONDITIONS}")
    keywords: Sequence[str] | None = None
    if prompt_backend is not None:
        try:
            raw = prompt_backend.keywords(sample.left, condition)
            if raw and all(isinstance(k, str) and k for k in raw):
                keywords = tuple(raw)
        except Exception:
            keywords = None
    if keywords is not None:
        return WeatherPrompt(condition=condition, keywords=tuple(keywords), source="llm")
    return WeatherPrompt(condition=condition, keywords=TEMPLATE_KEYWORDS[condition], source="template")
