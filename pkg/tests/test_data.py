import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oec.data import (
    DataError,
    LabeledDataset,
    Normalizer,
    SplitSpec,
    apply_normalizer,
    fit_normalizer,
    generate_synthetic,
    inject_noise,
    load_csv,
    noise_bounds,
    save_csv,
    stratified_split,
)


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_basic(self, tmp_path):
        data = load_csv(_write(tmp_path, "f1,f2,y\n1,2,0\n3,4,1\n5,6,0\n"), "y")
        assert (data.m, data.n) == (3, 2)
        np.testing.assert_array_equal(data.features, [[1, 2], [3, 4], [5, 6]])
        np.testing.assert_array_equal(data.labels, [0, 1, 0])

    def test_textual_labels_first_appearance(self, tmp_path):
        data = load_csv(_write(tmp_path, "f1,label\n1,b\n2,a\n3,b\n"))
        assert data.class_ids == (0, 1)
        np.testing.assert_array_equal(data.labels, [0, 1, 0])

    def test_label_column_by_index(self, tmp_path):
        data = load_csv(_write(tmp_path, "y,f1\n-1,0.5\n1,1.5\n"), 0)
        assert data.class_ids == (-1, 1)
        np.testing.assert_array_equal(data.features[:, 0], [0.5, 1.5])

    def test_nan_names_cell(self, tmp_path):
        with pytest.raises(DataError, match=r"row 2, column 'f2'"):
            load_csv(_write(tmp_path, "f1,f2,label\n1,2,0\n3,NaN,1\n"))

    def test_non_numeric_names_cell(self, tmp_path):
        with pytest.raises(DataError, match=r"row 1, column 'f1'"):
            load_csv(_write(tmp_path, "f1,label\nabc,0\n1,1\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "nope.csv")

    def test_single_class(self, tmp_path):
        with pytest.raises(DataError, match="fewer than 2 classes"):
            load_csv(_write(tmp_path, "f1,label\n1,0\n2,0\n"))

    def test_round_trip(self, tmp_path):
        data = generate_synthetic("two_gaussians", 5, seed=1)
        save_csv(data, tmp_path / "s.csv")
        back = load_csv(tmp_path / "s.csv")
        np.testing.assert_array_equal(back.features, data.features)
        np.testing.assert_array_equal(back.labels, data.labels)
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == "f1,f2,label"


class TestNormalizer:
    def test_two_point_population_std(self):
        norm = fit_normalizer(LabeledDataset([[1.0], [3.0]], [0, 1]))
        assert norm.means[0] == 2.0
        assert norm.stds[0] == 1.0

    def test_constant_column(self):
        data = LabeledDataset([[5.0, 1], [5.0, 2], [5.0, 3]], [0, 1, 1])
        norm = fit_normalizer(data)
        assert norm.stds[0] == 1.0
        np.testing.assert_array_equal(apply_normalizer(norm, data).features[:, 0], 0.0)

    def test_unseen_row_uses_train_statistics(self):
        norm = fit_normalizer(LabeledDataset([[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1]))
        # mean 3, population std sqrt(5)
        np.testing.assert_allclose(norm.transform([[100.0]]), [[97.0 / np.sqrt(5)]])

    def test_identity(self):
        norm = Normalizer(np.zeros(2), np.ones(2))
        x = np.array([[1.5, -2.0]])
        np.testing.assert_array_equal(norm.transform(x), x)

    def test_arithmetic(self):
        assert Normalizer([4.0], [2.0]).transform([[10.0]])[0, 0] == 3.0

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(0)
        x = rng.normal(10, 3, size=(50, 4))
        norm = fit_normalizer(LabeledDataset(x, np.arange(50) % 2))
        np.testing.assert_allclose(norm.inverse(norm.transform(x)), x, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            Normalizer([0.0], [1.0]).transform([[1.0, 2.0]])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 5))
    def test_fit_apply_standardizes(self, seed, m, n):
        rng = np.random.default_rng(seed)
        x = rng.normal(rng.uniform(-50, 50, n), rng.uniform(0.1, 20, n), size=(m, n))
        x[:, 0] = 7.25
        data = LabeledDataset(x, np.arange(m) % 2)
        out = apply_normalizer(fit_normalizer(data), data).features
        assert np.all(np.abs(out.mean(axis=0)) < 1e-9)
        np.testing.assert_allclose(out[:, 1:].var(axis=0), 1.0, atol=1e-9)
        np.testing.assert_array_equal(out[:, 0], 0.0)


class TestStratifiedSplit:
    def _data(self, sizes, labels=(-1, 1)):
        y = np.concatenate([np.full(k, c) for k, c in zip(sizes, labels)])
        x = np.arange(len(y), dtype=float)[:, None]
        return LabeledDataset(x, y)

    def test_sizes(self):
        train, test = stratified_split(self._data((100, 100)), SplitSpec(0.7, seed=3))
        assert train.class_counts() == {-1: 70, 1: 70}
        assert test.class_counts() == {-1: 30, 1: 30}

    def test_per_class_override(self):
        spec = SplitSpec(0.7, {-1: 0.70, 1: 0.05}, seed=3)
        train, _ = stratified_split(self._data((200, 200)), spec)
        assert train.class_counts() == {-1: 140, 1: 10}

    def test_clamp_keeps_both_sides_nonempty(self):
        train, test = stratified_split(self._data((3, 2)), SplitSpec(0.01, seed=0))
        assert train.class_counts() == {-1: 1, 1: 1}
        train, test = stratified_split(self._data((3, 2)), SplitSpec(0.99, seed=0))
        assert test.class_counts() == {-1: 1, 1: 1}

    def test_round_half_up(self):
        # 0.5 * 5 = 2.5 rounds up to 3
        train, _ = stratified_split(self._data((5, 5)), SplitSpec(0.5, seed=0))
        assert train.class_counts() == {-1: 3, 1: 3}

    def test_partition_and_determinism(self):
        data = self._data((37, 23))
        a_train, a_test = stratified_split(data, SplitSpec(0.7, seed=11))
        b_train, b_test = stratified_split(data, SplitSpec(0.7, seed=11))
        np.testing.assert_array_equal(a_train.features, b_train.features)
        ids_train = set(a_train.features[:, 0])
        ids_test = set(a_test.features[:, 0])
        assert not ids_train & ids_test
        assert ids_train | ids_test == set(data.features[:, 0])

    def test_singleton_class_rejected(self):
        with pytest.raises(DataError, match="class 1"):
            stratified_split(self._data((5, 1)), SplitSpec(0.7))

    def test_bad_fraction(self):
        with pytest.raises(DataError):
            SplitSpec(1.0)


class TestInjectNoise:
    def _data(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 10, size=(40, 3))
        x[0] = 0.0
        x[1] = 10.0
        return LabeledDataset(x, np.r_[np.full(20, -1), np.full(20, 1)])

    def test_bounds(self):
        data = self._data()
        out = inject_noise(data, 1, 1.0, seed=4)
        changed = out.features[data.labels == 1]
        assert np.all(changed >= -5.0) and np.all(changed <= 15.0)
        lo, hi = noise_bounds(data.features)
        np.testing.assert_array_equal(lo, -5.0)
        np.testing.assert_array_equal(hi, 15.0)

    def test_zero_fraction_is_identity(self):
        data = self._data()
        out = inject_noise(data, 1, 0.0, seed=4)
        np.testing.assert_array_equal(out.features, data.features)

    def test_full_fraction_changes_every_target_row(self):
        x = np.arange(20, dtype=float).reshape(10, 2)
        data = LabeledDataset(np.r_[x, x + 100], np.r_[np.full(10, 1), np.full(10, -1)])
        out = inject_noise(data, 1, 1.0, seed=1)
        changed = np.any(out.features != data.features, axis=1)
        assert changed.sum() == 10
        assert np.all(changed[:10])

    def test_only_selected_rows_change(self):
        data = self._data()
        out = inject_noise(data, 1, 0.15, seed=9)
        changed = np.flatnonzero(np.any(out.features != data.features, axis=1))
        assert len(changed) == 3  # floor(0.15 * 20)
        assert np.all(data.labels[changed] == 1)
        np.testing.assert_array_equal(out.labels, data.labels)

    def test_deterministic(self):
        data = self._data()
        a = inject_noise(data, -1, 0.5, seed=2)
        b = inject_noise(data, -1, 0.5, seed=2)
        np.testing.assert_array_equal(a.features, b.features)


class TestSynthetic:
    def test_mean_law_of_large_numbers(self):
        data = generate_synthetic("two_gaussians", 1000, seed=0)
        pos = data.features[data.labels == 1].mean(axis=0)
        neg = data.features[data.labels == -1].mean(axis=0)
        assert np.all(np.abs(pos - [3, 6]) < 0.2)
        assert np.all(np.abs(neg - [-9, -3]) < 0.2)

    def test_overlap_moves_positive_mean(self):
        data = generate_synthetic("overlap", 1000, seed=0)
        pos = data.features[data.labels == 1].mean(axis=0)
        assert np.all(np.abs(pos - [-3, -6]) < 0.2)

    def test_outliers_appended_to_positive_class(self):
        data = generate_synthetic("outliers", 100, seed=0)
        assert data.class_counts() == {-1: 100, 1: 110}
        tail = data.features[-10:]
        assert np.all(data.labels[-10:] == 1)
        assert np.linalg.norm(tail.mean(axis=0) - [50, 50]) < 25

    def test_deterministic(self):
        a = generate_synthetic("two_gaussians", 50, seed=5)
        b = generate_synthetic("two_gaussians", 50, seed=5)
        np.testing.assert_array_equal(a.features, b.features)

    def test_unknown_preset(self):
        with pytest.raises(DataError, match="unknown preset"):
            generate_synthetic("spirals", 10)
