import json

import numpy as np
import pytest

from stereoweather.core.manifest import load_manifest, load_sample, read_image, write_image
from stereoweather.core.types import StereoSample
from stereoweather.errors import ManifestError

from conftest import random_sample, write_dataset_tree


def test_empty_tree(tmp_path):
    for name in ("left", "right", "disp"):
        (tmp_path / "val" / name).mkdir(parents=True)
    manifest = load_manifest(tmp_path, "val")
    assert len(manifest) == 0


def test_incomplete_id_reported(tmp_path, rng):
    samples = [random_sample(rng, 32, 32, f"id{i}") for i in range(3)]
    split_dir = write_dataset_tree(tmp_path, "train", samples)
    # a 4th id present only in left/
    write_image(samples[0].left, split_dir / "left" / "id9.png")
    with pytest.raises(ManifestError, match="id9"):
        load_manifest(tmp_path, "train")


def test_labels_and_ordering(tmp_path, rng):
    samples = [random_sample(rng, 32, 32, sid) for sid in ("b_sample", "a_sample")]
    split_dir = write_dataset_tree(tmp_path, "train", samples)
    (split_dir / "subsets.json").write_text(
        json.dumps({"a_sample": "rainy", "b_sample": "foggy"})
    )
    manifest = load_manifest(tmp_path, "train")
    assert manifest.ids() == ["a_sample", "b_sample"]  # lexicographic
    assert [e.subset_label for e in manifest] == ["rainy", "foggy"]


def test_unknown_label_rejected(tmp_path, rng):
    split_dir = write_dataset_tree(tmp_path, "train", [random_sample(rng, 32, 32, "x")])
    (split_dir / "subsets.json").write_text(json.dumps({"x": "tsunami"}))
    with pytest.raises(ManifestError, match="tsunami"):
        load_manifest(tmp_path, "train")


def test_deterministic(tmp_path, rng):
    samples = [random_sample(rng, 32, 32, f"id{i}") for i in range(4)]
    write_dataset_tree(tmp_path, "train", samples)
    first = load_manifest(tmp_path, "train")
    second = load_manifest(tmp_path, "train")
    assert first.ids() == second.ids()


def test_load_sample_satisfies_invariants(tmp_path, rng):
    samples = [random_sample(rng, 32, 48, "s0")]
    write_dataset_tree(tmp_path, "train", samples)
    manifest = load_manifest(tmp_path, "train")
    sample = load_sample(manifest.entries[0])
    assert sample.left.shape == (3, 32, 48)
    assert sample.valid_mask.dtype == np.bool_
    valid_disp = sample.disparity[sample.valid_mask]
    assert np.isfinite(valid_disp).all() and (valid_disp > 0).all()
    # sparse encoding: masked-out pixels hold 0 on disk
    assert not sample.valid_mask.all()


def test_image_roundtrip_quantized(tmp_path, rng):
    img = rng.random((3, 16, 20), dtype=np.float32)
    write_image(img, tmp_path / "img.png")
    back = read_image(tmp_path / "img.png")
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-6


def test_stereo_sample_validation(rng):
    good = random_sample(rng, 16, 16, "ok")
    with pytest.raises(ValueError):
        StereoSample(good.left, good.right[:, :8], good.disparity, good.valid_mask, "bad")
    with pytest.raises(ValueError):
        StereoSample(good.left, good.right, -np.ones((16, 16), np.float32),
                     np.ones((16, 16), bool), "neg")
