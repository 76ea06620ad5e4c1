"""Generation backends: deterministic mocks plus thin remote adapters.

Every backend is addressed by id through ``build_backends``. The mocks are
pure functions of (inputs, seed) so pipeline runs are reproducible byte for
byte; the ``http-*`` adapters forward the same payloads to an external
service and exist so real models can be swapped in without touching the
pipeline.
"""

from __future__ import annotations

import base64
import json
import urllib.request
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..consistency.hooks import ConsistencyHook, SiteInvocation
from ..errors import BackendError
from .config import BackendIds, GenerationConfig
from .depth import DepthCondition, normalize_depth
from .prompts import CONDITIONS, WeatherPrompt

MOCK_PATCH = 16  # mock latent patch size; sites operate on this coarse grid
GRAIN_SIGMA = 0.01


# ---------------------------------------------------------------------------
# prompt / depth mocks


class MockPromptBackend:
    """Echoes the condition as the single keyword."""

    def keywords(self, image: np.ndarray, condition: str) -> list[str]:
        return [condition]


class UnreachablePromptBackend:
    """Stand-in for a dead endpoint; always raises."""

    def keywords(self, image: np.ndarray, condition: str) -> list[str]:
        raise BackendError("prompt backend unreachable")


class MockDepthBackend:
    """Depth defined as min-max normalized image luminance (constant -> 0.5)."""

    LUMA = (0.299, 0.587, 0.114)

    def predict(self, image: np.ndarray) -> np.ndarray:
        r, g, b = image[0], image[1], image[2]
        luminance = self.LUMA[0] * r + self.LUMA[1] * g + self.LUMA[2] * b
        return normalize_depth(luminance)


# ---------------------------------------------------------------------------
# mock diffusion


@dataclass(frozen=True)
class ConditionStyle:
    gain: tuple[float, float, float]
    bias: tuple[float, float, float]
    haze: float
    fog: tuple[float, float, float]


CONDITION_STYLES: dict[str, ConditionStyle] = {
    "rainy": ConditionStyle((0.55, 0.60, 0.70), (0.05, 0.06, 0.10), 0.35, (0.45, 0.48, 0.55)),
    "foggy": ConditionStyle((0.70, 0.70, 0.72), (0.15, 0.15, 0.16), 0.65, (0.78, 0.79, 0.80)),
    "snowy": ConditionStyle((0.80, 0.82, 0.90), (0.12, 0.12, 0.15), 0.50, (0.92, 0.93, 0.96)),
    "cloudy": ConditionStyle((0.75, 0.75, 0.78), (0.08, 0.08, 0.10), 0.20, (0.70, 0.70, 0.74)),
    "sunny": ConditionStyle((1.10, 1.05, 0.95), (0.02, 0.02, 0.00), 0.05, (0.95, 0.93, 0.85)),
}


def mock_style_transfer(
    image: np.ndarray, depth: np.ndarray, condition: str, seed: int
) -> np.ndarray:
    """The mock's closed-form output for one view.

    Per-channel tone curve, haze mixed in proportionally to distance
    (1 - normalized inverse depth), then seeded grain; all float32, clipped
    to [0, 1]. ``seed`` must already be view-specific.
    """
    style = CONDITION_STYLES[condition]
    gain = np.asarray(style.gain, dtype=np.float32)[:, None, None]
    bias = np.asarray(style.bias, dtype=np.float32)[:, None, None]
    fog = np.asarray(style.fog, dtype=np.float32)[:, None, None]
    curve = np.clip(gain * image.astype(np.float32) + bias, 0.0, 1.0)
    haze = np.float32(style.haze) * (np.float32(1.0) - depth.astype(np.float32))[None, :, :]
    out = (np.float32(1.0) - haze) * curve + haze * fog
    grain = np.random.default_rng(seed).standard_normal(out.shape, dtype=np.float32)
    return np.clip(out + np.float32(GRAIN_SIGMA) * grain, 0.0, 1.0)


def _pad_to_multiple(arr: np.ndarray, multiple: int) -> np.ndarray:
    h, w = arr.shape[-2], arr.shape[-1]
    pad_h, pad_w = (-h) % multiple, (-w) % multiple
    if not pad_h and not pad_w:
        return arr
    pad = [(0, 0)] * (arr.ndim - 2) + [(0, pad_h), (0, pad_w)]
    return np.pad(arr, pad, mode="edge")


def _patchify(images: np.ndarray, patch: int) -> np.ndarray:
    """[2, 3, H, W] -> [2, N, 3 * patch * patch] over non-overlapping patches."""
    v, c, h, w = images.shape
    rows, cols = h // patch, w // patch
    x = images.reshape(v, c, rows, patch, cols, patch)
    x = x.transpose(0, 2, 4, 1, 3, 5)  # [2, rows, cols, c, p, p]
    return np.ascontiguousarray(x.reshape(v, rows * cols, c * patch * patch))


def _unpatchify(tokens: np.ndarray, patch: int, rows: int, cols: int) -> np.ndarray:
    v, n, width = tokens.shape
    c = width // (patch * patch)
    x = tokens.reshape(v, rows, cols, c, patch, patch)
    x = x.transpose(0, 3, 1, 4, 2, 5)
    return np.ascontiguousarray(x.reshape(v, c, rows * patch, cols * patch))


class MockDiffusionBackend:
    """Deterministic stand-in for a depth+text conditioned two-view generator.

    Runs a scheduler-like trajectory over lossless patch tokens: each step
    pulls the stacked latents toward the closed-form target and then lets the
    attention sites transform them. The native site attention is the identity
    callable (the interesting transform is whatever hook wraps it), so a
    hookless run reproduces ``mock_style_transfer`` exactly while hooked runs
    see [2, N, C] tokens at every step.
    """

    SITES = ("unet.mid.attn", "unet.up.attn")

    def __init__(self) -> None:
        self._hooks: dict[str, ConsistencyHook] = {}

    # -- hook plumbing ------------------------------------------------------

    def attention_sites(self) -> list[str]:
        return list(self.SITES)

    def install_hook(self, site: str, hook: ConsistencyHook) -> None:
        if site not in self.SITES:
            raise BackendError(f"unknown attention site {site!r}")
        self._hooks[site] = hook

    def remove_hook(self, site: str) -> None:
        self._hooks.pop(site, None)

    @staticmethod
    def _native_attention(tokens: np.ndarray) -> np.ndarray:
        return tokens

    # -- generation ---------------------------------------------------------

    def generate(
        self,
        left: np.ndarray,
        right: np.ndarray,
        depth: DepthCondition,
        prompt: WeatherPrompt,
        cfg: GenerationConfig,
        seed: int,
    ) -> tuple[np.ndarray, np.ndarray]:
        if prompt.condition not in CONDITIONS:
            raise BackendError(f"condition {prompt.condition!r} not supported by the mock")
        h, w = left.shape[1], left.shape[2]
        targets = np.stack(
            [
                mock_style_transfer(left, depth.left, prompt.condition, _view_seed(seed, 0)),
                mock_style_transfer(right, depth.right, prompt.condition, _view_seed(seed, 1)),
            ]
        )

        padded = _pad_to_multiple(targets, MOCK_PATCH)
        rows, cols = padded.shape[2] // MOCK_PATCH, padded.shape[3] // MOCK_PATCH
        z_target = _patchify(padded, MOCK_PATCH)
        token_disp = self._token_disparity(depth, cfg, rows, cols)

        rng = np.random.default_rng(_view_seed(seed, 2))
        z = rng.standard_normal(z_target.shape, dtype=np.float32)
        steps = cfg.steps
        for k in range(steps):
            beta = np.float32(1.0 / (steps - k))  # final step lands exactly on the target
            z = (np.float32(1.0) - beta) * z + beta * z_target
            for site in self.SITES:
                z = self._run_site(site, z, (rows, cols), token_disp, k)

        out = _unpatchify(z, MOCK_PATCH, rows, cols)[:, :, :h, :w]
        return out[0], out[1]

    def _run_site(
        self,
        site: str,
        z: np.ndarray,
        grid: tuple[int, int],
        token_disp: np.ndarray,
        step: int,
    ) -> np.ndarray:
        hook = self._hooks.get(site)
        if hook is None:
            flat = z.reshape(-1, z.shape[-1])
            return self._native_attention(flat).reshape(z.shape)
        return hook(
            SiteInvocation(
                site=site,
                tokens=z,
                patch_grid=grid,
                scale=MOCK_PATCH,
                attention=self._native_attention,
                step=step,
                disparity=token_disp,
            )
        )

    @staticmethod
    def _token_disparity(
        depth: DepthCondition, cfg: GenerationConfig, rows: int, cols: int
    ) -> np.ndarray:
        """Pseudo-disparity per token: block-mean inverse depth scaled to
        [0, d_max / patch_scale], matching the similarity normalizer."""
        stacked = _pad_to_multiple(np.stack([depth.left, depth.right]), MOCK_PATCH)
        blocks = stacked.reshape(2, rows, MOCK_PATCH, cols, MOCK_PATCH).mean(axis=(2, 4))
        span = cfg.dfm.d_max / MOCK_PATCH
        return (blocks * span).reshape(2, rows * cols).astype(np.float64)


def _view_seed(seed: int, stream: int) -> int:
    # disjoint deterministic streams per view / purpose
    return (seed * 4 + stream) & 0xFFFFFFFFFFFFFFFF


# ---------------------------------------------------------------------------
# remote adapters (thin; payloads mirror the mock call signatures)


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype=np.float32).tobytes()).decode("ascii")


def _from_b64(payload: str, shape: list[int]) -> np.ndarray:
    return np.frombuffer(base64.b64decode(payload), dtype=np.float32).reshape(shape).copy()


class HttpJsonTransport:
    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def post(self, doc: dict) -> dict:
        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps(doc).encode("utf-8"),
            headers={"Content-Type": "application/json"},
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise BackendError(f"request to {self.endpoint} failed: {exc}") from exc


class HttpPromptBackend:
    def __init__(self, endpoint: str, transport=None):
        self.transport = transport or HttpJsonTransport(endpoint)

    def keywords(self, image: np.ndarray, condition: str) -> list[str]:
        resp = self.transport.post(
            {"task": "weather-keywords", "condition": condition, "image_shape": list(image.shape)}
        )
        return list(resp["keywords"])


class HttpDepthBackend:
    def __init__(self, endpoint: str, transport=None):
        self.transport = transport or HttpJsonTransport(endpoint)

    def predict(self, image: np.ndarray) -> np.ndarray:
        resp = self.transport.post(
            {"task": "depth", "image_b64": _b64(image), "image_shape": list(image.shape)}
        )
        return normalize_depth(_from_b64(resp["depth_b64"], resp["shape"]))


class HttpDiffusionBackend:
    """Remote two-view generator. Exposes no local attention sites; the dfm
    settings travel inside the request so a capable server can apply the
    consistency pass in-process."""

    def __init__(self, endpoint: str, transport=None):
        self.transport = transport or HttpJsonTransport(endpoint)

    def attention_sites(self) -> list[str]:
        return []

    def install_hook(self, site: str, hook: ConsistencyHook) -> None:
        raise BackendError("remote diffusion backend cannot host local attention hooks")

    def remove_hook(self, site: str) -> None:
        pass

    def generate(self, left, right, depth, prompt, cfg: GenerationConfig, seed: int):
        resp = self.transport.post(
            {
                "task": "stereo-style-transfer",
                "prompt": prompt.text(),
                "condition": prompt.condition,
                "steps": cfg.steps,
                "scheduler": cfg.scheduler,
                "guidance_scale": cfg.guidance_scale,
                "conditioning_scale": cfg.conditioning_scale,
                "seed": seed,
                "dfm": {
                    "n": cfg.dfm.n,
                    "alpha": cfg.dfm.alpha,
                    "d_max": cfg.dfm.d_max,
                    "layer_selector": cfg.dfm.layer_selector,
                },
                "left_b64": _b64(left),
                "right_b64": _b64(right),
                "depth_left_b64": _b64(depth.left),
                "depth_right_b64": _b64(depth.right),
                "image_shape": list(left.shape),
            }
        )
        out_l = _from_b64(resp["left_b64"], resp["shape"])
        out_r = _from_b64(resp["right_b64"], resp["shape"])
        return out_l, out_r


# ---------------------------------------------------------------------------
# registry


@dataclass
class BackendClients:
    diffusion: MockDiffusionBackend | HttpDiffusionBackend
    depth: MockDepthBackend | HttpDepthBackend
    prompt: MockPromptBackend | HttpPromptBackend | UnreachablePromptBackend


_FACTORIES: dict[str, Callable[[Optional[str]], object]] = {
    "mock-diffusion": lambda endpoint: MockDiffusionBackend(),
    "mock-depth": lambda endpoint: MockDepthBackend(),
    "mock-prompt": lambda endpoint: MockPromptBackend(),
    "http-diffusion": lambda endpoint: HttpDiffusionBackend(_require_endpoint(endpoint, "diffusion")),
    "http-depth": lambda endpoint: HttpDepthBackend(_require_endpoint(endpoint, "depth")),
    "http-prompt": lambda endpoint: HttpPromptBackend(_require_endpoint(endpoint, "prompt")),
}


def _require_endpoint(endpoint: Optional[str], role: str) -> str:
    if not endpoint:
        raise BackendError(f"backend id 'http-{role}' requires an endpoint URL in config")
    return endpoint


def build_backends(ids: BackendIds, endpoints: dict | None = None) -> BackendClients:
    endpoints = endpoints or {}

    def make(backend_id: str):
        factory = _FACTORIES.get(backend_id)
        if factory is None:
            raise BackendError(
                f"unknown backend id {backend_id!r}; known: {sorted(_FACTORIES)}"
            )
        return factory(endpoints.get(backend_id))

    return BackendClients(
        diffusion=make(ids.diffusion), depth=make(ids.depth), prompt=make(ids.prompt)
    )
