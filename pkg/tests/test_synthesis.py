import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_texture
from oracles import kkt_weights
from sketchiqa.errors import ConfigurationError, DataError, NumericalError, ParameterError, ShapeError, SizeError
from sketchiqa.synthesis import (
    SynthesisParams,
    TrainingPair,
    build_gallery,
    build_grid,
    find_neighbors,
    lle_weights,
    synthesize_sketch,
)


def psnr(a, b):
    mse = np.mean((a - b) ** 2)
    return np.inf if mse == 0 else 10 * np.log10(255**2 / mse)


class TestGrid:
    def test_single_patch(self):
        assert build_grid(8, 8).anchors == [(0, 0)]

    def test_exact_fit(self):
        assert build_grid(12, 8).row_anchors == (0, 4)

    def test_clamped_final_anchor(self):
        assert build_grid(13, 8).row_anchors == (0, 4, 5)

    def test_too_small(self):
        with pytest.raises(SizeError):
            build_grid(7, 20)

    @settings(max_examples=60, deadline=None)
    @given(
        rows=st.integers(1, 40),
        cols=st.integers(1, 40),
        patch=st.integers(1, 12),
        overlap_frac=st.floats(0, 0.99),
    )
    def test_coverage_and_order(self, rows, cols, patch, overlap_frac):
        overlap = int(overlap_frac * patch)
        params = SynthesisParams(patch_size=patch, overlap=overlap)
        if rows < patch or cols < patch:
            with pytest.raises(SizeError):
                build_grid(rows, cols, params)
            return
        grid = build_grid(rows, cols, params)
        count = np.zeros((rows, cols))
        for r, c in grid.anchors:
            count[r:r + patch, c:c + patch] += 1
        assert count.min() >= 1
        for axis in (grid.row_anchors, grid.col_anchors):
            assert all(b > a for a, b in zip(axis, axis[1:]))
        assert grid.row_anchors[-1] == rows - patch and grid.col_anchors[-1] == cols - patch


class TestNeighbors:
    def toy(self):
        return [TrainingPair(np.full((2, 2), v), np.full((2, 2), 10 * v), f"p{i}") for i, v in enumerate((1.0, 4.0, 2.0))]

    def test_hand_computed_order(self):
        # distances to a 2.5-valued patch: |1-2.5|*2 = 3, |4-2.5|*2 = 3, |2-2.5|*2 = 1
        params = SynthesisParams(patch_size=2, overlap=1, k=3, search_radius=0)
        got = find_neighbors(np.full(4, 2.5), (0, 0), self.toy(), params)
        assert [n.pair_index for n in got] == [2, 0, 1]
        assert [n.distance for n in got] == pytest.approx([1.0, 3.0, 3.0])

    def test_saturation(self):
        params = SynthesisParams(patch_size=2, overlap=1, k=10, search_radius=0)
        got = find_neighbors(np.full(4, 0.0), (0, 0), self.toy(), params)
        assert len(got) == 3
        assert [n.distance for n in got] == sorted(n.distance for n in got)

    def test_exact_patch_comes_first(self, rng):
        photos = [rng.uniform(0, 255, (12, 12)) for _ in range(3)]
        pairs = [TrainingPair(p, p, f"t{i}") for i, p in enumerate(photos)]
        params = SynthesisParams(patch_size=4, overlap=2, k=5, search_radius=2)
        test = photos[1][3:7, 5:9]
        best = find_neighbors(test, (4, 4), pairs, params)[0]
        assert best.pair_index == 1 and best.anchor == (3, 5) and best.distance == 0.0

    def test_ties_follow_pair_then_anchor(self):
        pair = TrainingPair(np.zeros((6, 6)), np.zeros((6, 6)), "z")
        params = SynthesisParams(patch_size=2, overlap=1, k=4, search_radius=1)
        got = find_neighbors(np.zeros(4), (2, 2), [pair, pair.__class__(np.zeros((6, 6)), np.zeros((6, 6)), "y")], params)
        assert [(n.pair_index, n.anchor) for n in got] == [(0, (1, 1)), (0, (1, 2)), (0, (1, 3)), (0, (2, 1))]

    def test_empty_training(self):
        with pytest.raises(ConfigurationError):
            find_neighbors(np.zeros(4), (0, 0), [], SynthesisParams(patch_size=2, overlap=1))


class TestWeights:
    def test_single_neighbor(self):
        assert np.array_equal(lle_weights(np.arange(4.0), np.ones((1, 4))), [1.0])

    def test_symmetric_pair(self, rng):
        t = rng.normal(size=8)
        d = rng.normal(size=8)
        assert np.allclose(lle_weights(t, np.stack([t + d, t - d])), [0.5, 0.5], atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_kkt_oracle(self, seed):
        rng = np.random.default_rng(seed)
        t = rng.normal(size=16)
        nb = rng.normal(size=(3, 16))
        assert np.max(np.abs(lle_weights(t, nb, 1e-4) - kkt_weights(t, nb, 1e-4))) < 1e-9

    def test_weights_may_be_negative(self):
        t = np.array([3.0, 0.0])
        nb = np.array([[1.0, 0.0], [2.0, 0.0]])
        w = lle_weights(t, nb, 1e-8)
        assert w[0] < 0 < w[1]

    def test_singular_without_regularizer(self):
        t = np.zeros(1)
        nb = np.array([[1.0], [2.0], [3.0]])
        with pytest.raises(NumericalError, match="lam > 0"):
            lle_weights(t, nb, 0.0)

    def test_all_neighbors_equal_test(self):
        assert np.allclose(lle_weights(np.ones(4), np.ones((3, 4))), [1 / 3] * 3)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 8), shift=st.floats(-100, 100))
    def test_affine_sum_and_shift_invariance(self, seed, k, shift):
        rng = np.random.default_rng(seed)
        t = rng.uniform(0, 255, 16)
        nb = rng.uniform(0, 255, (k, 16))
        w = lle_weights(t, nb, 1e-4)
        assert abs(w.sum() - 1) < 1e-9
        assert np.allclose(lle_weights(t + shift, nb + shift, 1e-4), w, atol=1e-9)


class TestSynthesize:
    def test_identity_training_reproduces_photo(self, rng):
        photos = [make_texture(rng, 32) for _ in range(4)]
        pairs = [TrainingPair(p, p, f"t{i}") for i, p in enumerate(photos)]
        out = synthesize_sketch(photos[2], pairs)
        assert psnr(out, photos[2]) >= 40

    def test_constant_in_constant_out(self):
        pairs = [TrainingPair(np.full((16, 16), v), np.full((16, 16), 2 * v), str(v)) for v in (10.0, 20.0)]
        out = synthesize_sketch(np.full((16, 16), 10.0), pairs)
        assert np.allclose(out, 20.0, atol=1e-9)

    def test_single_pair_k1_patchwork(self, rng):
        photo = rng.uniform(0, 255, (20, 20))
        sketch = rng.uniform(0, 255, (20, 20))
        params = SynthesisParams(k=1)
        out = synthesize_sketch(photo, [TrainingPair(photo, sketch, "only")], params)
        assert np.allclose(out, sketch, atol=1e-12)
        flat = synthesize_sketch(rng.uniform(0, 255, (20, 20)), [TrainingPair(photo, np.full((20, 20), 90.0), "c")], params)
        assert np.allclose(flat, 90.0, atol=1e-12)

    def test_output_range_and_determinism(self, rng):
        photos = [rng.uniform(0, 255, (24, 24)) for _ in range(3)]
        pairs = [TrainingPair(p, rng.uniform(0, 255, p.shape), f"t{i}") for i, p in enumerate(photos)]
        test = rng.uniform(0, 255, (24, 24))
        a = synthesize_sketch(test, pairs)
        b = synthesize_sketch(test, pairs)
        assert a.min() >= 0 and a.max() <= 255
        assert a.tobytes() == b.tobytes()

    def test_dimension_mismatch(self, rng):
        pairs = [TrainingPair(np.zeros((16, 16)), np.zeros((16, 16)), "a")]
        with pytest.raises(ShapeError):
            synthesize_sketch(np.zeros((16, 17)), pairs)

    def test_pair_validation(self):
        with pytest.raises(ShapeError):
            TrainingPair(np.zeros((4, 4)), np.zeros((4, 5)), "x")
        with pytest.raises(DataError):
            TrainingPair(np.zeros((4, 4)), np.zeros((4, 4)), "")

    @pytest.mark.parametrize("kw", [{"overlap": 8}, {"k": 0}, {"lam": -1.0}, {"search_radius": -1}])
    def test_param_validation(self, kw):
        with pytest.raises(ParameterError):
            SynthesisParams(**kw)


class TestGallery:
    def pairs(self, rng):
        return [TrainingPair(rng.uniform(0, 255, (16, 16)), rng.uniform(0, 255, (16, 16)), f"t{i}") for i in range(2)]

    def test_empty(self, rng):
        assert len(build_gallery([], self.pairs(rng))) == 0

    def test_single_entry_is_composition(self, rng):
        pairs = self.pairs(rng)
        photo = rng.uniform(0, 255, (16, 16))
        g = build_gallery([("x", photo)], pairs)
        assert g.ids == ("x",) and np.array_equal(g.images[0], synthesize_sketch(photo, pairs))

    def test_labels_in_order(self, rng):
        labels = ["e", "b", "d", "a", "c"]
        g = build_gallery([(l, rng.uniform(0, 255, (16, 16))) for l in labels], self.pairs(rng))
        assert list(g.ids) == labels

    def test_duplicates(self, rng):
        with pytest.raises(DataError):
            build_gallery([("a", np.zeros((16, 16))), ("a", np.zeros((16, 16)))], self.pairs(rng))
