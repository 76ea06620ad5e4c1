import numpy as np
import pytest

from stereoweather.consistency.hooks import SiteInvocation, attention_hook
from stereoweather.consistency.types import SimilarityConfig
from stereoweather.errors import ConfigurationError


class TinyBackend:
    """Two named sites over a [2, 4, 3] token block; native attention = identity."""

    def __init__(self):
        self.hooks = {}

    def attention_sites(self):
        return ["down.attn", "mid.attn"]

    def install_hook(self, site, hook):
        self.hooks[site] = hook

    def remove_hook(self, site):
        self.hooks.pop(site, None)

    def run_steps(self, tokens, steps):
        for step in range(steps):
            for site in self.attention_sites():
                hook = self.hooks.get(site)
                if hook is None:
                    continue
                tokens = hook(
                    SiteInvocation(
                        site=site,
                        tokens=tokens,
                        patch_grid=(2, 2),
                        scale=16,
                        attention=lambda t: t,
                        step=step,
                    )
                )
        return tokens


def test_selector_matching_no_sites_errors():
    hook = attention_hook("unet.*", 1, SimilarityConfig())
    with pytest.raises(ConfigurationError):
        hook.install(TinyBackend())


def test_install_and_count(rng):
    backend = TinyBackend()
    hook = attention_hook("*.attn", 2, SimilarityConfig())
    installed = hook.install(backend)
    assert installed == ["down.attn", "mid.attn"]
    tokens = rng.standard_normal((2, 4, 3)).astype(np.float32)
    backend.run_steps(tokens, steps=5)
    assert hook.invocations == 10  # 5 steps x 2 sites
    hook.remove(backend)
    assert backend.hooks == {}


def test_selector_subset():
    backend = TinyBackend()
    hook = attention_hook("mid.*", 1, SimilarityConfig())
    assert hook.install(backend) == ["mid.attn"]


def test_n_zero_identity(rng):
    backend = TinyBackend()
    hook = attention_hook("*", 0, SimilarityConfig())
    hook.install(backend)
    tokens = rng.standard_normal((2, 4, 3)).astype(np.float32)
    out = backend.run_steps(tokens.copy(), steps=3)
    np.testing.assert_array_equal(out, tokens)
    assert hook.invocations == 6


def test_timestep_range_gates_fusion(rng):
    backend = TinyBackend()
    hook = attention_hook("*", 4, SimilarityConfig(), timestep_range=(2, 4))
    hook.install(backend)
    tokens = rng.standard_normal((2, 4, 3)).astype(np.float32)
    backend.run_steps(tokens, steps=6)
    # fusion only counted on steps 2 and 3, both sites
    assert hook.invocations == 4


def test_n_clamped_to_token_count(rng):
    backend = TinyBackend()
    hook = attention_hook("*", 99, SimilarityConfig())
    hook.install(backend)
    tokens = rng.standard_normal((2, 4, 3)).astype(np.float32)
    out = backend.run_steps(tokens, steps=1)
    assert out.shape == tokens.shape
    assert hook.invocations == 2
