import json

import numpy as np
import pytest

from stereoweather.core.manifest import load_manifest
from stereoweather.datagen.backends import (
    CONDITION_STYLES,
    GRAIN_SIGMA,
    MOCK_PATCH,
    BackendClients,
    MockDepthBackend,
    MockDiffusionBackend,
    MockPromptBackend,
    UnreachablePromptBackend,
    _view_seed,
    build_backends,
    mock_style_transfer,
)
from stereoweather.datagen.config import BackendIds, DfmSettings, GenerationConfig
from stereoweather.datagen.depth import DepthCondition, normalize_depth, predict_depth
from stereoweather.datagen.pipeline import generate_pair, run_pipeline, stable_seed
from stereoweather.datagen.prompts import TEMPLATE_KEYWORDS, build_weather_prompt
from stereoweather.errors import ConfigurationError, PipelineError

from conftest import random_sample, write_dataset_tree

PAPER_RAINY_KEYWORDS = (
    "rainy", "dark clouds", "wet pavement", "raindrops", "reflections", "misty air",
)


def small_cfg(**kw):
    defaults = dict(steps=4, seed=7, dfm=DfmSettings(n=6, alpha=0.5, d_max=192.0))
    defaults.update(kw)
    return GenerationConfig(**defaults)


# -- prompts ------------------------------------------------------------------


def test_rainy_template_keywords(rng):
    sample = random_sample(rng, 32, 32)
    prompt = build_weather_prompt(sample, "rainy", None)
    assert prompt.source == "template"
    for kw in PAPER_RAINY_KEYWORDS:
        assert kw in prompt.keywords
    assert "rainy, dark clouds, wet pavement, raindrops, reflections, misty air" in prompt.text()


def test_prompt_backend_failure_falls_back(rng):
    sample = random_sample(rng, 32, 32)
    prompt = build_weather_prompt(sample, "foggy", UnreachablePromptBackend())
    assert prompt.source == "template"
    assert prompt.keywords == TEMPLATE_KEYWORDS["foggy"]


def test_prompt_mock_echoes_condition(rng):
    sample = random_sample(rng, 32, 32)
    prompt = build_weather_prompt(sample, "snowy", MockPromptBackend())
    assert prompt.source == "llm"
    assert prompt.keywords == ("snowy",)


def test_prompt_unknown_condition(rng):
    with pytest.raises(ValueError):
        build_weather_prompt(random_sample(rng, 32, 32), "hailstorm", None)


def test_prompt_fallback_is_total(rng):
    sample = random_sample(rng, 32, 32)
    for condition in TEMPLATE_KEYWORDS:
        prompt = build_weather_prompt(sample, condition, UnreachablePromptBackend())
        assert prompt.keywords


# -- depth --------------------------------------------------------------------


def test_mock_depth_is_normalized_luminance(rng):
    sample = random_sample(rng, 24, 32)
    got = MockDepthBackend().predict(sample.left)
    lum = 0.299 * sample.left[0] + 0.587 * sample.left[1] + 0.114 * sample.left[2]
    want = (lum - lum.min()) / (lum.max() - lum.min())
    np.testing.assert_array_equal(got, want.astype(np.float32))


def test_constant_image_depth_is_half():
    image = np.full((3, 8, 8), 0.3, dtype=np.float32)
    out = MockDepthBackend().predict(image)
    np.testing.assert_array_equal(out, np.full((8, 8), 0.5, dtype=np.float32))


def test_depth_range_property(rng):
    for _ in range(5):
        img = rng.random((3, 16, 16), dtype=np.float32)
        out = MockDepthBackend().predict(img)
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_predict_depth_wraps_failures(rng):
    class Exploding:
        def predict(self, image):
            raise RuntimeError("depth server down")

    with pytest.raises(PipelineError):
        predict_depth(random_sample(rng, 16, 16), Exploding())


def test_normalize_depth_constant_rule():
    assert (normalize_depth(np.full((4, 4), 9.0)) == 0.5).all()


# -- mock diffusion -----------------------------------------------------------


def recompute_closed_form(image, depth, condition, seed):
    """Independent float64 recomputation of the mock's documented formula."""
    style = CONDITION_STYLES[condition]
    gain = np.asarray(style.gain, dtype=np.float64)[:, None, None]
    bias = np.asarray(style.bias, dtype=np.float64)[:, None, None]
    fog = np.asarray(style.fog, dtype=np.float64)[:, None, None]
    curve = np.clip(gain * image.astype(np.float64) + bias, 0.0, 1.0)
    haze = style.haze * (1.0 - depth.astype(np.float64))[None, :, :]
    out = (1.0 - haze) * curve + haze * fog
    grain = np.random.default_rng(seed).standard_normal(out.shape, dtype=np.float32)
    return np.clip(out + GRAIN_SIGMA * grain.astype(np.float64), 0.0, 1.0)


def test_mock_generate_matches_closed_form(rng):
    sample = random_sample(rng, 48, 64)
    depth = predict_depth(sample, MockDepthBackend())
    prompt = build_weather_prompt(sample, "rainy", None)
    cfg = small_cfg()
    out_l, out_r = MockDiffusionBackend().generate(
        sample.left, sample.right, depth, prompt, cfg, seed=99
    )
    want_l = recompute_closed_form(sample.left, depth.left, "rainy", _view_seed(99, 0))
    want_r = recompute_closed_form(sample.right, depth.right, "rainy", _view_seed(99, 1))
    np.testing.assert_allclose(out_l, want_l, atol=1e-6)
    np.testing.assert_allclose(out_r, want_r, atol=1e-6)


def test_mock_generate_seed_determinism(rng):
    sample = random_sample(rng, 32, 48)
    depth = predict_depth(sample, MockDepthBackend())
    prompt = build_weather_prompt(sample, "foggy", None)
    cfg = small_cfg()
    a = MockDiffusionBackend().generate(sample.left, sample.right, depth, prompt, cfg, seed=5)
    b = MockDiffusionBackend().generate(sample.left, sample.right, depth, prompt, cfg, seed=5)
    c = MockDiffusionBackend().generate(sample.left, sample.right, depth, prompt, cfg, seed=6)
    assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()
    assert a[0].tobytes() != c[0].tobytes()


def test_generate_pair_counter_and_resolution(rng):
    sample = random_sample(rng, 40, 56, "odd")  # not a multiple of 16: padded inside
    clients = build_backends(BackendIds())
    depth = predict_depth(sample, clients.depth)
    prompt = build_weather_prompt(sample, "cloudy", clients.prompt)
    cfg = small_cfg(steps=5)
    pair = generate_pair(sample, prompt, depth, cfg, clients, seed=1)
    assert pair.left.shape == sample.left.shape
    assert pair.sites == tuple(MockDiffusionBackend.SITES)
    assert pair.hook_invocations == 5 * 2  # steps x selected sites


def test_hook_n_zero_identical_to_hookless(rng):
    sample = random_sample(rng, 32, 32)
    clients = build_backends(BackendIds())
    depth = predict_depth(sample, clients.depth)
    prompt = build_weather_prompt(sample, "sunny", clients.prompt)

    cfg0 = small_cfg(dfm=DfmSettings(n=0))
    hooked = generate_pair(sample, prompt, depth, cfg0, clients, seed=3)
    bare_l, bare_r = MockDiffusionBackend().generate(
        sample.left, sample.right, depth, prompt, cfg0, seed=3
    )
    assert hooked.left.tobytes() == bare_l.tobytes()
    assert hooked.right.tobytes() == bare_r.tobytes()


def test_hook_fusion_changes_output(rng):
    sample = random_sample(rng, 32, 32)
    clients = build_backends(BackendIds())
    depth = predict_depth(sample, clients.depth)
    prompt = build_weather_prompt(sample, "sunny", clients.prompt)
    off = generate_pair(sample, prompt, depth, small_cfg(dfm=DfmSettings(n=0)), clients, seed=3)
    on = generate_pair(sample, prompt, depth, small_cfg(dfm=DfmSettings(n=4)), clients, seed=3)
    assert off.left.tobytes() != on.left.tobytes()


def test_bad_selector_raises(rng):
    sample = random_sample(rng, 32, 32)
    clients = build_backends(BackendIds())
    depth = predict_depth(sample, clients.depth)
    prompt = build_weather_prompt(sample, "sunny", clients.prompt)
    cfg = small_cfg(dfm=DfmSettings(n=2, layer_selector="vae.*"))
    with pytest.raises(ConfigurationError):
        generate_pair(sample, prompt, depth, cfg, clients, seed=3)


# -- pipeline -----------------------------------------------------------------


def make_source_tree(tmp_path, rng, n=2, height=48, width=64):
    samples = [random_sample(rng, height, width, f"src{i}") for i in range(n)]
    write_dataset_tree(tmp_path / "source", "train", samples)
    return load_manifest(tmp_path / "source", "train")


def tree_bytes(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_pipeline_end_to_end(tmp_path, rng):
    manifest = make_source_tree(tmp_path, rng)
    cfg = small_cfg(steps=3)
    out_root = tmp_path / "generated"
    report = run_pipeline(manifest, ["rainy", "foggy", "snowy"], cfg, None, out_root)

    assert report.generated == 6
    assert report.skipped == []
    out_manifest = load_manifest(out_root, "train")
    assert len(out_manifest) == 6

    # disparity pass-through, byte for byte
    for entry in out_manifest:
        src_id = entry.id.rsplit("_", 1)[0]
        src_disp = manifest.root / "train" / "disp" / f"{src_id}.pfm"
        assert entry.disparity_path.read_bytes() == src_disp.read_bytes()

    labels = json.loads((out_root / "train" / "subsets.json").read_text())
    assert set(labels.values()) == {"rainy", "foggy", "snowy"}
    for new_id, count in report.hook_invocations.items():
        assert count == cfg.steps * 2


def test_pipeline_rerun_byte_identical(tmp_path, rng):
    manifest = make_source_tree(tmp_path, rng)
    cfg = small_cfg(steps=2)
    run_pipeline(manifest, ["rainy"], cfg, None, tmp_path / "out_a")
    run_pipeline(manifest, ["rainy"], cfg, None, tmp_path / "out_b")
    assert tree_bytes(tmp_path / "out_a") == tree_bytes(tmp_path / "out_b")


def test_pipeline_empty_manifest(tmp_path, rng):
    for name in ("left", "right", "disp"):
        (tmp_path / "source" / "val" / name).mkdir(parents=True)
    manifest = load_manifest(tmp_path / "source", "val")
    report = run_pipeline(manifest, ["rainy"], small_cfg(), None, tmp_path / "out")
    assert report.generated == 0
    assert json.loads((tmp_path / "out" / "val" / "subsets.json").read_text()) == {}
    assert not list((tmp_path / "out" / "val" / "left").glob("*.png"))


def test_pipeline_unwritable_out_root(tmp_path, rng):
    manifest = make_source_tree(tmp_path, rng)
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    with pytest.raises(ConfigurationError):
        run_pipeline(manifest, ["rainy"], small_cfg(), None, blocker / "out")


def test_pipeline_records_skips(tmp_path, rng):
    manifest = make_source_tree(tmp_path, rng)

    class ExplodingDepth:
        def predict(self, image):
            raise RuntimeError("no depth today")

    clients = BackendClients(
        diffusion=MockDiffusionBackend(), depth=ExplodingDepth(), prompt=MockPromptBackend()
    )
    report = run_pipeline(manifest, ["rainy"], small_cfg(), clients, tmp_path / "out")
    assert report.generated == 0
    assert len(report.skipped) == 2
    assert all("PipelineError" in s["error"] for s in report.skipped)
    assert not list((tmp_path / "out" / "train" / "left").glob("*.png"))  # no partial triples


def test_stable_seed_is_stable():
    assert stable_seed(7, "src0", "rainy") == stable_seed(7, "src0", "rainy")
    assert stable_seed(7, "src0", "rainy") != stable_seed(7, "src0", "foggy")
    assert stable_seed(7, "src0", "rainy") != stable_seed(8, "src0", "rainy")


def test_build_backends_unknown_id():
    from stereoweather.errors import BackendError

    with pytest.raises(BackendError):
        build_backends(BackendIds(diffusion="imaginary"))


def test_http_backends_require_endpoint():
    from stereoweather.errors import BackendError

    with pytest.raises(BackendError):
        build_backends(BackendIds(depth="http-depth"))


def test_http_adapter_payload_roundtrip(rng):
    # drive the adapter through a stub transport; no network involved
    from stereoweather.datagen.backends import HttpDepthBackend, _b64

    class StubTransport:
        def post(self, doc):
            assert doc["task"] == "depth"
            shape = doc["image_shape"]
            depth = np.linspace(0, 2, shape[1] * shape[2], dtype=np.float32).reshape(shape[1:])
            return {"depth_b64": _b64(depth), "shape": [shape[1], shape[2]]}

    backend = HttpDepthBackend("http://unused", transport=StubTransport())
    out = backend.predict(rng.random((3, 4, 6), dtype=np.float32))
    assert out.shape == (4, 6)
    assert out.min() >= 0.0 and out.max() <= 1.0
