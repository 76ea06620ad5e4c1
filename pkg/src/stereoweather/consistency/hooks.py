"""Installable hook that runs the consistency pass inside a generation backend.

A backend exposes named self-attention sites. Installing a hook wraps every
site whose name matches the selector: at each denoising step the site hands
over its stacked two-view tokens and its own attention callable; the hook
builds a PatchSet, runs apply_consistency around that callable, and returns
the un-fused tokens. State (the invocation counter) is confined to one hook
object, i.e. one generation run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fnmatch import fnmatch
from typing import Callable, Optional, Protocol, Tuple

import numpy as np

from ..errors import ConfigurationError
from .fusion import apply_consistency
from .types import PatchSet, SimilarityConfig


@dataclass
class SiteInvocation:
    """Everything a backend passes to the hook at one attention site call."""

    site: str
    tokens: np.ndarray  # [2, N, C], index 0 = left view
    patch_grid: Tuple[int, int]
    scale: int
    attention: Callable[[np.ndarray], np.ndarray]  # the site's own attention
    step: int
    disparity: Optional[np.ndarray] = None  # [2, N] matching signal at patch scale


class HookableBackend(Protocol):
    def attention_sites(self) -> list[str]: ...

    def install_hook(self, site: str, hook: "ConsistencyHook") -> None: ...

    def remove_hook(self, site: str) -> None: ...


class ConsistencyHook:
    def __init__(
        self,
        layer_selector: str,
        n: int,
        cfg: SimilarityConfig,
        timestep_range: Optional[Tuple[int, int]] = None,
    ) -> None:
        self.layer_selector = layer_selector
        self.n = n
        self.cfg = cfg
        self.timestep_range = timestep_range
        self.invocations = 0
        self._installed_sites: list[str] = []

    def matches(self, site: str) -> bool:
        return fnmatch(site, self.layer_selector)

    def install(self, backend: HookableBackend) -> list[str]:
        """Wrap all matching sites; errors if the selector matches none."""
        sites = [s for s in backend.attention_sites() if self.matches(s)]
        if not sites:
            raise ConfigurationError(
                f"layer selector {self.layer_selector!r} matches no attention site "
                f"(available: {backend.attention_sites()})"
            )
        for site in sites:
            backend.install_hook(site, self)
        self._installed_sites = sites
        return sites

    def remove(self, backend: HookableBackend) -> None:
        for site in self._installed_sites:
            backend.remove_hook(site)
        self._installed_sites = []

    def _step_active(self, step: int) -> bool:
        if self.timestep_range is None:
            return True
        lo, hi = self.timestep_range
        return lo <= step < hi

    def __call__(self, call: SiteInvocation) -> np.ndarray:
        if not self._step_active(call.step):
            # outside the configured window: defer to the site's own attention
            flat = call.tokens.reshape(-1, call.tokens.shape[-1])
            return np.asarray(call.attention(flat)).reshape(call.tokens.shape)
        patches = PatchSet(
            data=call.tokens,
            patch_grid=call.patch_grid,
            scale=call.scale,
            disparity=call.disparity,
        )
        # configs carry an absolute n; sites with fewer tokens fuse all of them
        n_effective = min(self.n, patches.num_patches)
        out = apply_consistency(patches, n_effective, self.cfg, call.attention)
        self.invocations += 1
        return out.data


def attention_hook(
    layer_selector: str,
    n: int,
    cfg: SimilarityConfig,
    timestep_range: Optional[Tuple[int, int]] = None,
) -> ConsistencyHook:
    """Build a hook ready to install into a generation backend."""
    return ConsistencyHook(layer_selector, n, cfg, timestep_range)


__all__ = ["ConsistencyHook", "HookableBackend", "SiteInvocation", "attention_hook"]
