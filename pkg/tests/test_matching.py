import numpy as np
import pytest

from stereoweather.consistency import _match_fallback, matching
from stereoweather.consistency.types import MatchMap, PatchSet, SimilarityConfig, TokenSet


def oracle_similarity(fi, di, fj, dj, alpha, d_max):
    """Independent scalar recomputation of the combined similarity."""
    na, nb = float(np.linalg.norm(fi)), float(np.linalg.norm(fj))
    sim_feat = float(np.dot(fi, fj)) / (na * nb) if na > 0 and nb > 0 else 0.0
    sim_disp = min(1.0, max(0.0, 1.0 - abs(di - dj) / d_max))
    return alpha * sim_disp + (1.0 - alpha) * sim_feat


def oracle_match(src_feat, src_disp, dst_feat, dst_disp, n, alpha, d_max):
    """Exhaustive O(N^2) scan replicating the link + top-n rule."""
    links = []
    for i in range(len(src_feat)):
        best = None
        for j in range(len(dst_feat)):
            sim = oracle_similarity(src_feat[i], src_disp[i], dst_feat[j], dst_disp[j], alpha, d_max)
            if best is None or sim > best[2]:
                best = (i, j, sim)
        links.append(best)
    links.sort(key=lambda t: (-t[2], t[0], t[1]))
    return links[:n]


@pytest.fixture(params=["active", "fallback"])
def kernel(request, monkeypatch):
    if request.param == "fallback":
        monkeypatch.setattr(matching, "_kernel", _match_fallback)
    return request.param


# -- patch_similarity ---------------------------------------------------------


def test_similarity_identical_tokens():
    cfg = SimilarityConfig(alpha=0.3, d_max=10.0)
    f = np.array([0.3, -0.8, 0.5])
    assert matching.patch_similarity(f, 4.0, f, 4.0, cfg) == pytest.approx(1.0)


def test_similarity_orthogonal_features_alpha_zero():
    cfg = SimilarityConfig(alpha=0.0, d_max=10.0)
    sim = matching.patch_similarity(np.array([1.0, 0.0]), 5.0, np.array([0.0, 1.0]), 5.0, cfg)
    assert sim == pytest.approx(0.0, abs=1e-12)


def test_similarity_hand_value():
    # equal features (cos=1), disparities a full d_max apart: 0.5*0 + 0.5*1 = 0.5
    cfg = SimilarityConfig(alpha=0.5, d_max=24.0)
    sim = matching.patch_similarity(np.array([1.0, 0.0]), 0.0, np.array([1.0, 0.0]), 24.0, cfg)
    assert sim == pytest.approx(0.5)


def test_similarity_zero_norm_feature():
    cfg = SimilarityConfig(alpha=0.5, d_max=10.0)
    sim = matching.patch_similarity(np.zeros(3), 1.0, np.ones(3), 1.0, cfg)
    assert sim == pytest.approx(0.5)  # disparity term only


def test_similarity_range_clip():
    cfg = SimilarityConfig(alpha=1.0, d_max=2.0)
    sim = matching.patch_similarity(np.ones(2), 0.0, np.ones(2), 50.0, cfg)
    assert sim == pytest.approx(0.0)  # disparity term clipped at 0


# -- partition ----------------------------------------------------------------


def test_partition_preserves_values(rng):
    data = rng.standard_normal((2, 16, 6))
    disp = rng.uniform(0, 5, size=(2, 16))
    patches = PatchSet(data=data, patch_grid=(4, 4), scale=8, disparity=disp)
    src, dst = matching.partition(patches)
    np.testing.assert_array_equal(src.features, data[0])
    np.testing.assert_array_equal(dst.features, data[1])
    np.testing.assert_array_equal(src.disparity, disp[0])
    np.testing.assert_array_equal(dst.disparity, disp[1])
    assert len(src) == len(dst) == 16


def test_partition_empty():
    patches = PatchSet(data=np.zeros((2, 0, 4)), patch_grid=(0, 0), scale=8)
    src, dst = matching.partition(patches)
    assert len(src) == 0 and len(dst) == 0


# -- match_top_n --------------------------------------------------------------


def test_match_n_zero(kernel):
    src = TokenSet(np.ones((4, 2)), np.zeros(4))
    assert matching.match_top_n(src, src, 0, SimilarityConfig()).pairs == ()


def test_match_identical_single(kernel):
    u = TokenSet(np.array([[0.6, 0.8]]), np.array([3.0]))
    pairs = matching.match_top_n(u, u, 1, SimilarityConfig()).pairs
    assert len(pairs) == 1
    assert pairs[0][:2] == (0, 0)
    assert pairs[0][2] == pytest.approx(1.0)


def test_match_n_too_large(kernel):
    src = TokenSet(np.ones((2, 2)))
    with pytest.raises(ValueError):
        matching.match_top_n(src, src, 3, SimilarityConfig())


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_match_agrees_with_oracle(kernel, seed):
    rng = np.random.default_rng(seed)
    cfg = SimilarityConfig(alpha=0.4, d_max=12.0)
    src = TokenSet(rng.standard_normal((8, 4)), rng.uniform(0, 12, 8))
    dst = TokenSet(rng.standard_normal((8, 4)), rng.uniform(0, 12, 8))
    got = matching.match_top_n(src, dst, 3, cfg)
    want = oracle_match(src.features, src.disparity, dst.features, dst.disparity, 3, 0.4, 12.0)
    assert [p[:2] for p in got.pairs] == [w[:2] for w in want]
    np.testing.assert_allclose([p[2] for p in got.pairs], [w[2] for w in want], rtol=1e-9)


def test_match_ties_duplicate_tokens(kernel):
    # dst 1 and 3 are identical: the lower index must win for every src
    token = np.array([1.0, 2.0])
    dst = TokenSet(np.stack([[5.0, -1.0], token, [0.0, 1.0], token]),
                   np.array([0.0, 2.0, 0.0, 2.0]))
    src = TokenSet(np.stack([token, token]), np.array([2.0, 2.0]))
    got = matching.match_top_n(src, dst, 2, SimilarityConfig(alpha=0.5, d_max=8.0))
    # equal similarities: selection tie-break keeps lower src first
    assert [p[:2] for p in got.pairs] == [(0, 1), (1, 1)]


def test_match_without_disparity_uses_features_only(kernel):
    rng = np.random.default_rng(3)
    feats = rng.standard_normal((6, 5))
    with_d = matching.match_top_n(
        TokenSet(feats), TokenSet(feats), 2, SimilarityConfig(alpha=0.9, d_max=5.0)
    )
    no_alpha = matching.match_top_n(
        TokenSet(feats), TokenSet(feats), 2, SimilarityConfig(alpha=0.0, d_max=5.0)
    )
    assert [p[:2] for p in with_d.pairs] == [p[:2] for p in no_alpha.pairs]


def test_match_monotone_in_n(kernel):
    rng = np.random.default_rng(9)
    cfg = SimilarityConfig(alpha=0.5, d_max=10.0)
    src = TokenSet(rng.standard_normal((10, 3)), rng.uniform(0, 10, 10))
    dst = TokenSet(rng.standard_normal((10, 3)), rng.uniform(0, 10, 10))
    previous: set = set()
    for n in range(0, 11):
        pairs = {p[:2] for p in matching.match_top_n(src, dst, n, cfg).pairs}
        assert previous <= pairs
        previous = pairs


def test_kernels_agree(rng):
    if matching.active_kernel() != "cython":
        pytest.skip("compiled kernel not built")
    from stereoweather.consistency import _matchext

    feats = rng.standard_normal((32, 8))
    disp = rng.uniform(0, 12, 32)
    args = (
        np.ascontiguousarray(feats), np.ascontiguousarray(rng.standard_normal((32, 8))),
        np.ascontiguousarray(disp), np.ascontiguousarray(rng.uniform(0, 12, 32)),
        0.5, 12.0,
    )
    dst_c, sim_c = _matchext.best_links(*args)
    dst_np, sim_np = _match_fallback.best_links(*args)
    np.testing.assert_array_equal(dst_c, dst_np)
    np.testing.assert_allclose(sim_c, sim_np, rtol=1e-12)


def test_matchmap_invariants():
    with pytest.raises(ValueError):
        MatchMap(pairs=((0, 1, 0.5), (0, 2, 0.4)), n=2)  # duplicate src
    with pytest.raises(ValueError):
        MatchMap(pairs=((0, 1, 0.5),), n=2)  # wrong length
