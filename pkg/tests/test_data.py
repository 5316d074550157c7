import numpy as np
import pytest

from nqklab.data import (
    EXCLUDED,
    BinaryMask,
    FeatureChain,
    FeatureTable,
    SplitSpec,
    assign_label,
    fold_partitions,
    gamma,
    label_tiles,
    make_split_spec,
    make_synthetic,
    minmax_scale_apply,
    minmax_scale_fit,
    partition,
    pca_apply,
    pca_fit,
    percentile_threshold,
    rasterize_polygon,
    read_feature_csv,
    read_pgm,
    reassemble,
    rebalance,
    stratified_kfold,
    train_test_indices,
    write_feature_csv,
    write_pgm,
    zscore_apply,
    zscore_fit,
)
from nqklab.errors import ConfigError, DataError
from nqklab.svm import accuracy, fit_svc, svc_predict


def raw(features, labels=None):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    rows = features.shape[0]
    if labels is None:
        labels = [1 if i % 2 == 0 else -1 for i in range(rows)]
    return FeatureTable(features, labels, [f"r{i}" for i in range(rows)])


class TestRasterize:

    def test_axis_aligned_square(self):
        mask = rasterize_polygon([(0, 0), (10, 0), (10, 10), (0, 10)], 20, 20)
        assert mask.bits.sum() == 100
        assert mask.bits[:10, :10].all()

    def test_zero_area_triangle(self):
        mask = rasterize_polygon([(0, 0), (5, 5), (10, 10)], 20, 20)
        assert not mask.bits.any()

    def test_whole_canvas(self):
        assert rasterize_polygon([(0, 0), (20, 0), (20, 20), (0, 20)], 20, 20).bits.all()

    def test_matches_brute_force_point_in_polygon(self):
        vertices = [(2.2, 1.3), (17.9, 4.1), (11.4, 18.6), (3.7, 12.2)]
        mask = rasterize_polygon(vertices, 20, 20)

        def inside(px, py):
            result = False
            for (ax, ay), (bx, by) in zip(vertices, vertices[1:] + vertices[:1]):
                if (ay > py) != (by > py) and px < ax + (py - ay) * (bx - ax) / (by - ay):
                    result = not result
            return result

        expected = np.array([[inside(c + 0.5, r + 0.5) for c in range(20)] for r in range(20)])
        np.testing.assert_array_equal(mask.bits, expected)

    def test_needs_three_vertices(self):
        with pytest.raises(DataError):
            rasterize_polygon([(0, 0), (1, 1)], 4, 4)

    def test_mask_dimensions(self):
        with pytest.raises(DataError):
            BinaryMask(0, 3, np.zeros(0))


class TestPartition:

    def test_full_image_gives_400_tiles(self):
        tiling = partition(np.zeros((5000, 5000), dtype=bool), 250)
        assert len(tiling.tiles) == 400
        assert tiling.remainder_pixels == 0

    def test_single_tile(self):
        assert len(partition(np.ones((250, 250)), 250).tiles) == 1

    def test_remainder_is_reported(self):
        tiling = partition(np.zeros((300, 500)), 250)
        assert len(tiling.tiles) == 2
        assert tiling.dropped_rows == 50 and tiling.dropped_cols == 0
        assert tiling.remainder_pixels == 300 * 500 - 2 * 250 * 250

    def test_row_major_order(self):
        grid = np.arange(16).reshape(4, 4)
        tiles = partition(grid, 2).tiles
        assert [t[0, 0] for t in tiles] == [0, 2, 8, 10]

    def test_reassemble_is_identity(self, rng):
        grid = rng.integers(0, 2, (12, 18))
        np.testing.assert_array_equal(reassemble(partition(grid, 6)), grid)

    def test_tile_larger_than_image(self):
        with pytest.raises(DataError):
            partition(np.zeros((100, 100)), 250)


class TestGammaAndLabels:

    def test_all_black(self):
        assert gamma(np.zeros((250, 250))) == 0.0

    def test_all_white(self):
        assert gamma(BinaryMask.from_array(np.ones((4, 4)))) == 1.0

    def test_hundred_pixels(self):
        bits = np.zeros((250, 250), dtype=bool)
        bits[0, :100] = True
        assert gamma(bits) == pytest.approx(0.0016)

    def test_percentile_single_value(self):
        assert percentile_threshold([0.1], 73.0) == 0.1

    def test_percentile_nearest_rank(self):
        values = np.linspace(0.001, 0.01, 100)
        shuffled = np.random.default_rng(0).permutation(values)
        assert percentile_threshold(shuffled, 15) == values[14]

    def test_percentile_zero_is_minimum(self):
        assert percentile_threshold([0.3, 0.2, 0.5], 0) == 0.2

    def test_percentile_empty(self):
        with pytest.raises(DataError):
            percentile_threshold([], 15)

    def test_percentile_out_of_range(self):
        with pytest.raises(ConfigError):
            percentile_threshold([0.1], 120)

    def test_assign_label(self):
        assert assign_label(0.0, 0.002) == -1
        assert assign_label(0.01, 0.002) == 1
        assert assign_label(0.001, 0.002) is EXCLUDED
        assert assign_label(0.002, 0.002) is EXCLUDED

    def test_assign_label_is_monotone(self):
        order = {-1: 0, EXCLUDED: 1, 1: 2}
        ranks = [order[assign_label(g, 0.05)] for g in np.linspace(0.0, 0.2, 41)]
        assert ranks == sorted(ranks)

    def test_label_tiles(self):
        mask = np.zeros((4, 8), dtype=bool)
        mask[0:2, 2:4] = True         # tile 1 full
        mask[0, 4] = True             # tile 2 sparse
        mask[2:4, 0:2] = True         # tile 4 full
        mask[2:4, 6] = True           # tile 7 half
        result = label_tiles([mask], tile=2, q=25.0)
        assert result.gammas.tolist() == [0.0, 1.0, 0.25, 0.0, 1.0, 0.0, 0.0, 0.5]
        assert result.epsilon == 0.25
        assert result.labels == [-1, 1, EXCLUDED, -1, 1, -1, -1, 1]
        assert result.n_excluded == 1
        assert result.coverage_percent == pytest.approx(25.0)

    def test_label_tiles_without_white_pixels(self, caplog):
        masks = [BinaryMask.from_array(np.zeros((500, 500), dtype=bool))] * 2
        with caplog.at_level("WARNING", logger="nqklab.data"):
            result = label_tiles(masks, tile=250)
        assert result.labels == [-1] * 8
        assert result.epsilon == 0.0 and result.n_excluded == 0
        assert "No white pixels" in caplog.text


class TestPgm:

    def test_write_then_read(self, tmp_path):
        mask = rasterize_polygon([(1, 1), (7, 2), (4, 6)], 9, 8)
        path = tmp_path / "mask.pgm"
        write_pgm(mask, path)
        assert path.read_bytes().startswith(b"P5")
        back = read_pgm(path)
        assert (back.width, back.height) == (9, 8)
        np.testing.assert_array_equal(back.bits, mask.bits)

    def test_unreadable(self, tmp_path):
        path = tmp_path / "broken.pgm"
        path.write_text("not an image")
        with pytest.raises(DataError):
            read_pgm(path)


class TestFeatureTable:

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            raw([[0.0, np.nan], [1.0, 2.0]])

    def test_rejects_bad_labels(self):
        with pytest.raises(DataError):
            raw([[0.0], [1.0]], [1, 0])

    def test_rejects_row_mismatch(self):
        with pytest.raises(DataError):
            FeatureTable(np.zeros((3, 2)), [1, -1], ["a", "b", "c"])

    def test_scaled_must_be_bounded(self):
        with pytest.raises(DataError):
            FeatureTable(np.array([[1.5]]), [1], ["a"], 'scaled')

    def test_features_are_read_only(self):
        table = raw([[0.0], [1.0]])
        with pytest.raises(ValueError):
            table.features[0, 0] = 3.0

    def test_select_ids(self):
        table = raw(np.arange(5.0))
        assert table.select_ids(["r3", "r1"]).features[:, 0].tolist() == [3.0, 1.0]
        with pytest.raises(DataError):
            table.select_ids(["missing"])


class TestFeatureCsv:

    def test_write_then_read(self, tmp_path, rng):
        table = FeatureTable(rng.normal(size=(6, 3)), [1, -1, 1, -1, 1, -1], [f"t{i}" for i in range(6)])
        path = tmp_path / "features.csv"
        write_feature_csv(table, path)
        back = read_feature_csv(path)
        assert back.ids == table.ids
        np.testing.assert_array_equal(back.labels, table.labels)
        np.testing.assert_allclose(back.features, table.features, rtol=1e-9)

    def test_labels_from_gamma(self, tmp_path):
        path = tmp_path / "latent.csv"
        path.write_text("id,f0,f1,gamma\n"
                        "a,0.1,0.2,0.0\n"
                        "b,0.3,0.4,0.5\n"
                        "c,0.5,0.6,0.01\n"
                        "d,0.7,0.8,0.0\n"
                        "e,0.9,1.0,0.3\n")
        table = read_feature_csv(path, q=50.0)
        # positives 0.01, 0.3, 0.5 -> epsilon 0.3; c and e are excluded
        assert table.ids == ("a", "b", "d")
        assert table.labels.tolist() == [-1, 1, -1]
        assert table.gammas.tolist() == [0.0, 0.5, 0.0]

    def test_all_zero_gamma_rows_are_negatives(self, tmp_path):
        path = tmp_path / "dark.csv"
        path.write_text("id,f0,gamma\na,0.1,0.0\nb,0.2,0.0\n")
        table = read_feature_csv(path)
        assert table.ids == ("a", "b")
        assert table.labels.tolist() == [-1, -1]

    def test_feature_columns_sorted_numerically(self, tmp_path):
        path = tmp_path / "cols.csv"
        path.write_text("id,f10,f2,label\nx,1.0,2.0,1\ny,3.0,4.0,-1\n")
        np.testing.assert_array_equal(read_feature_csv(path).features, [[2.0, 1.0], [4.0, 3.0]])

    def test_needs_labels_or_gamma(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("id,f0\nx,1.0\n")
        with pytest.raises(DataError):
            read_feature_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_feature_csv(tmp_path / "nope.csv")


class TestRebalance:

    def test_balanced_unchanged(self):
        table = raw(np.arange(200.0), [1] * 100 + [-1] * 100)
        assert rebalance(table, seed=0) is table

    def test_majority_undersampled(self):
        table = raw(np.arange(1000.0), [1] * 50 + [-1] * 950)
        out = rebalance(table, seed=3)
        assert out.class_counts() == {1: 50, -1: 50}
        assert out.ids[:50] == table.ids[:50]

    def test_deterministic(self):
        table = raw(np.arange(300.0), [1] * 40 + [-1] * 260)
        assert rebalance(table, seed=8).ids == rebalance(table, seed=8).ids


class TestZScore:

    def test_hand_arithmetic(self):
        out, stats = zscore_fit(raw([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out.features[:, 0], [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)
        assert out.provenance == 'zscored'
        assert stats.constant_columns == ()

    def test_unit_moments(self, rng):
        out, _ = zscore_fit(raw(rng.normal(3.0, 2.0, (50, 4))))
        np.testing.assert_allclose(out.features.mean(axis=0), 0.0, atol=1e-8)
        np.testing.assert_allclose(out.features.std(axis=0), 1.0, atol=1e-8)

    def test_constant_column(self):
        out, stats = zscore_fit(raw([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]))
        np.testing.assert_array_equal(out.features[:, 0], 0.0)
        assert stats.constant_columns == (0,)

    def test_apply_reuses_fitted_stats(self, rng):
        train, test = raw(rng.normal(size=(20, 3))), raw(rng.normal(5.0, 1.0, (10, 3)))
        fitted, stats = zscore_fit(train)
        np.testing.assert_array_equal(zscore_apply(train, stats).features, fitted.features)
        mean_before = stats.mean.copy()
        zscore_apply(test, stats)
        np.testing.assert_array_equal(stats.mean, mean_before)
        assert not stats.mean.flags.writeable


class TestReduction:

    def test_axis_aligned_data(self):
        table = raw([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        out, reduction = pca_fit(table, 1, method='tsvd')
        np.testing.assert_allclose(reduction.components, [[1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(out.features[:, 0], [1.0, 2.0, 3.0], atol=1e-12)

    def test_pca_centres(self):
        out, reduction = pca_fit(raw([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]), 1)
        np.testing.assert_allclose(reduction.center, [2.0, 0.0])
        np.testing.assert_allclose(out.features[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize('method', ['pca', 'tsvd'])
    def test_reconstruction_error_matches_discarded_spectrum(self, rng, method):
        for _ in range(20):
            X = rng.normal(size=(20, 8))
            out, reduction = pca_fit(raw(X), 3, method=method)
            centred = X - reduction.center
            singular = np.linalg.svd(centred, compute_uv=False)
            rebuilt = out.features @ reduction.components
            error = np.sum((centred - rebuilt) ** 2)
            assert error == pytest.approx(np.sum(singular[3:] ** 2), abs=1e-8)

    def test_component_sign_convention(self, rng):
        _, reduction = pca_fit(raw(rng.normal(size=(30, 5))), 4)
        for component in reduction.components:
            assert component[np.argmax(np.abs(component))] > 0

    def test_full_rank_preserves_distances(self, rng):
        X = rng.normal(size=(12, 4))
        out, _ = pca_fit(raw(X), 4)
        before = np.linalg.norm(X[:, None] - X[None], axis=-1)
        after = np.linalg.norm(out.features[:, None] - out.features[None], axis=-1)
        np.testing.assert_allclose(after, before, atol=1e-8)

    def test_too_many_components(self):
        with pytest.raises(DataError):
            pca_fit(raw(np.zeros((5, 2))), 3)

    def test_too_few_rows(self):
        with pytest.raises(DataError):
            pca_fit(raw([[1.0, 2.0]]), 1)

    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            pca_fit(raw(np.eye(3)), 1, method='ica')

    def test_apply_checks_width(self, rng):
        _, reduction = pca_fit(raw(rng.normal(size=(6, 3))), 2)
        with pytest.raises(DataError):
            pca_apply(raw(np.zeros((2, 4))), reduction)


class TestMinMax:

    def test_simple_column(self):
        out, _ = minmax_scale_fit(raw([0.0, 5.0, 10.0]))
        np.testing.assert_allclose(out.features[:, 0], [-1.0, 0.0, 1.0])
        assert out.provenance == 'scaled'

    def test_constant_column(self):
        out, stats = minmax_scale_fit(raw([[3.0, 0.0], [3.0, 1.0]]))
        np.testing.assert_array_equal(out.features[:, 0], 0.0)
        assert stats.constant_columns == (0,)

    def test_clamps_out_of_range(self):
        _, stats = minmax_scale_fit(raw([0.0, 5.0, 10.0]))
        out, clamped = minmax_scale_apply(raw([12.0, 5.0, -1.0]), stats)
        np.testing.assert_allclose(out.features[:, 0], [1.0, 0.0, -1.0])
        assert clamped == 2


class TestPipelineOrder:

    def test_zscore_after_reduce(self, rng):
        reduced, _ = pca_fit(raw(rng.normal(size=(8, 3))), 2)
        with pytest.raises(DataError):
            zscore_fit(reduced)

    def test_reduce_after_scale(self, rng):
        scaled, _ = minmax_scale_fit(raw(rng.normal(size=(8, 3))))
        with pytest.raises(DataError):
            pca_fit(scaled, 2)

    def test_stage_cannot_repeat(self, rng):
        zscored, _ = zscore_fit(raw(rng.normal(size=(8, 3))))
        with pytest.raises(DataError):
            zscore_fit(zscored)

    def test_chain_output_in_range(self, rng):
        train, test = raw(rng.normal(size=(40, 6))), raw(rng.normal(0.0, 3.0, (15, 6)))
        scaled, chain = FeatureChain.fit(train, 2)
        assert scaled.p == 2 and scaled.provenance == 'scaled'
        assert np.all(np.abs(chain.transform(test).features) <= 1.0)


class TestSplits:

    def test_full_size_stratified_folds(self):
        labels = np.array([1, -1] * 1000)
        folds = stratified_kfold(labels, 10, seed=0)
        assert [f.size for f in folds] == [200] * 10
        for fold in folds:
            assert np.sum(labels[fold] == 1) == 100
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(2000))

    def test_small_folds(self):
        labels = np.array([1] * 5 + [-1] * 5)
        for fold in stratified_kfold(labels, 5, seed=1):
            assert sorted(labels[fold].tolist()) == [-1, 1]

    def test_deterministic(self):
        labels = np.array([1, -1] * 30)
        a, b = stratified_kfold(labels, 3, seed=4), stratified_kfold(labels, 3, seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_invalid_k(self):
        with pytest.raises(ConfigError):
            stratified_kfold([1, -1, 1], 1, seed=0)

    def test_fold_partitions(self):
        folds = stratified_kfold(np.array([1, -1] * 6), 3, seed=2)
        for train, test in fold_partitions(folds):
            assert np.intersect1d(train, test).size == 0
            assert train.size + test.size == 12

    def test_train_test_sizes(self):
        labels = np.array([1, -1] * 350)
        train, test = train_test_indices(labels, 500, 200, seed=0)
        assert train.size == 500 and test.size == 200
        assert np.intersect1d(train, test).size == 0
        assert abs(int(np.sum(labels[test] == 1)) - 100) <= 1

    def test_train_test_from_larger_pool(self):
        train, test = train_test_indices(np.array([1, -1] * 50), 20, 10, seed=3)
        assert train.size == 20 and test.size == 10

    def test_train_test_too_many(self):
        with pytest.raises(DataError):
            train_test_indices(np.array([1, -1] * 5), 8, 4, seed=0)


class TestSplitSpec:

    def test_make_split_spec(self):
        ids = [f"tile-{i}" for i in range(100)]
        split = make_split_spec(ids, 40, seed=0, n_one_to_n=30, n_n_to_n=20)
        subsets = {k: set(v) for k, v in split.subsets.items()}
        assert len(subsets['unet_train']) == 40 and len(subsets['unet_test']) == 60
        assert subsets['one_to_n'] <= subsets['unet_test']
        assert subsets['n_to_n'] <= subsets['unet_test']
        assert not subsets['one_to_n'] & subsets['n_to_n']

    def test_too_small(self):
        with pytest.raises(DataError):
            make_split_spec(["a", "b"], 1, seed=0, n_one_to_n=1, n_n_to_n=1)

    def test_overlap_rejected(self):
        with pytest.raises(DataError):
            SplitSpec({'unet_train': ['a'], 'unet_test': ['a', 'b']}, seed=0)

    def test_subset_outside_unet_test(self):
        with pytest.raises(DataError):
            SplitSpec({'unet_train': ['a'], 'unet_test': ['b'], 'one_to_n': ['a']}, seed=0)

    def test_save_and_load(self, tmp_path):
        split = make_split_spec([str(i) for i in range(20)], 5, seed=1, n_one_to_n=6, n_n_to_n=4)
        split.save(tmp_path / "splits.json")
        assert SplitSpec.load(tmp_path / "splits.json").to_dict() == split.to_dict()

    def test_load_corrupt(self, tmp_path):
        path = tmp_path / "splits.json"
        path.write_text('{"seed": 1, "subsets": {"unet_train": ["a"], "unet_test": ["a"]}}')
        with pytest.raises(DataError):
            SplitSpec.load(path)


class TestSynthetic:

    def test_separated_blobs(self):
        table = make_synthetic('blobs', 40, 0.0, seed=0)
        model = fit_svc(table, 'linear', C=1.0)
        assert accuracy(svc_predict(model, table, table.features), table.labels) == 1.0

    def test_circles_not_linear(self):
        table = make_synthetic('circles', 100, 0.05, seed=0)
        model = fit_svc(table, 'linear', C=1.0)
        assert accuracy(svc_predict(model, table, table.features), table.labels) < 0.8

    @pytest.mark.parametrize('kind', ['blobs', 'circles', 'moons'])
    def test_deterministic(self, kind):
        a, b = make_synthetic(kind, 30, 0.1, seed=5), make_synthetic(kind, 30, 0.1, seed=5)
        np.testing.assert_array_equal(a.features, b.features)
        assert set(np.unique(a.labels)) == {-1, 1}

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            make_synthetic('spirals', 10, 0.1, seed=0)
