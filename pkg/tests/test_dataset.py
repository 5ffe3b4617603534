import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gbsvm.dataset import (
    Dataset,
    NoiseSpec,
    inject_label_noise,
    load_csv,
    make_gaussian_blobs,
    noise_indices,
    normalize_minmax,
    split_train_test,
)
from gbsvm.exceptions import (
    DataFormatError,
    InsufficientDataError,
    StratificationError,
    UnsupportedMulticlassError,
)


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_minimal_mapping(self, tmp_path):
        p = _write(tmp_path, "1.0,2.0,a\n3.0,4.0,b\n")
        ds = load_csv(p, label_column=-1, positive_label="a")
        assert ds.labels.tolist() == [1, -1]
        assert ds.features.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_fourclass_sized_file(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [f"{x:.5f},{y:.5f},{lab}" for x, y, lab in
                zip(rng.random(862), rng.random(862), rng.choice([1, -1], 862))]
        ds = load_csv(_write(tmp_path, "\n".join(rows) + "\n"))
        assert ds.n == 862
        assert ds.d == 2

    def test_three_labels_rejected(self, tmp_path):
        p = _write(tmp_path, "1,a\n2,b\n3,c\n")
        with pytest.raises(UnsupportedMulticlassError):
            load_csv(p)

    def test_parse_error_reports_row_and_column(self, tmp_path):
        p = _write(tmp_path, "1,2,0\n3,x,1\n")
        with pytest.raises(DataFormatError) as exc:
            load_csv(p)
        assert exc.value.row == 2
        assert exc.value.column == 2

    def test_single_row_rejected(self, tmp_path):
        with pytest.raises(InsufficientDataError):
            load_csv(_write(tmp_path, "1,2,0\n"))

    def test_header_autodetected_and_label_by_name(self, tmp_path):
        p = _write(tmp_path, "f1,cls,f2\n1,yes,5\n2,no,6\n3,yes,7\n")
        ds = load_csv(p, label_column="cls", positive_label="yes")
        assert ds.labels.tolist() == [1, -1, 1]
        assert ds.features.tolist() == [[1, 5], [2, 6], [3, 7]]
        ds2 = load_csv(p, label_column=1, positive_label="no")
        assert ds2.labels.tolist() == [-1, 1, -1]

    def test_default_positive_label_is_larger_numeric(self, tmp_path):
        ds = load_csv(_write(tmp_path, "1,-1\n2,1\n3,-1\n"))
        assert ds.labels.tolist() == [-1, 1, -1]

    def test_row_order_preserved(self, tmp_path):
        ds = load_csv(_write(tmp_path, "5,0\n4,1\n3,0\n2,1\n"))
        assert ds.features[:, 0].tolist() == [5, 4, 3, 2]
        assert ds.ids.tolist() == [0, 1, 2, 3]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv")


class TestDatasetType:
    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 1)), np.array([1, 0, -1]))

    def test_arrays_are_read_only(self):
        ds = Dataset(np.zeros((2, 1)), np.array([1, -1]))
        with pytest.raises(ValueError):
            ds.features[0, 0] = 1.0


class TestNormalize:
    def _ds(self, col):
        col = np.asarray(col, dtype=float)
        return Dataset(col[:, None], np.array([1, -1, 1][: len(col)]))

    def test_affine_map(self):
        assert normalize_minmax(self._ds([2, 4, 6])).features[:, 0].tolist() == [0, 0.5, 1]

    def test_constant_column(self):
        assert normalize_minmax(self._ds([5, 5, 5])).features[:, 0].tolist() == [0, 0, 0]

    def test_unit_column_unchanged(self):
        assert normalize_minmax(self._ds([0, 0.25, 1])).features[:, 0].tolist() == [0, 0.25, 1]

    def test_labels_unchanged(self):
        ds = self._ds([3, 1, 2])
        assert normalize_minmax(ds).labels.tolist() == ds.labels.tolist()

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_idempotent_and_in_unit_box(self, X):
        y = np.where(np.arange(len(X)) % 2 == 0, 1, -1)
        once = normalize_minmax(Dataset(X, y))
        twice = normalize_minmax(once)
        assert np.all((once.features >= 0) & (once.features <= 1))
        np.testing.assert_array_equal(once.features, twice.features)


class TestSplit:
    def _balanced(self, n=100):
        return Dataset(np.arange(n, dtype=float)[:, None], np.where(np.arange(n) < n // 2, 1, -1))

    def test_stratified_counts(self):
        # 50 per class, round(0.7 * 50) = 35 per class in train
        train, test = split_train_test(self._balanced(), 0.7, seed=3)
        assert train.n == 70 and test.n == 30
        assert train.class_counts() == (35, 35)
        assert test.class_counts() == (15, 15)

    def test_deterministic(self):
        a, _ = split_train_test(self._balanced(), 0.7, seed=11)
        b, _ = split_train_test(self._balanced(), 0.7, seed=11)
        c, _ = split_train_test(self._balanced(), 0.7, seed=12)
        assert a.ids.tolist() == b.ids.tolist()
        assert a.ids.tolist() != c.ids.tolist()

    @pytest.mark.parametrize("frac", [0.0, 1.0, -0.1])
    def test_fraction_precondition(self, frac):
        with pytest.raises(ValueError):
            split_train_test(self._balanced(), frac, seed=0)

    def test_tiny_class(self):
        ds = Dataset(np.arange(5.0)[:, None], np.array([1, 1, 1, 1, -1]))
        with pytest.raises(StratificationError):
            split_train_test(ds, 0.5, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 40), st.integers(2, 40), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
    def test_partition_and_proportions(self, n_pos, n_neg, frac, seed):
        n = n_pos + n_neg
        ds = Dataset(np.random.default_rng(0).random((n, 2)), np.array([1] * n_pos + [-1] * n_neg),
                     ids=np.arange(100, 100 + n))
        train, test = split_train_test(ds, frac, seed)
        tr, te = set(train.ids.tolist()), set(test.ids.tolist())
        assert tr | te == set(ds.ids.tolist())
        assert not tr & te
        for cls_count, cls_train in ((n_pos, train.class_counts()[0]), (n_neg, train.class_counts()[1])):
            assert abs(cls_train - frac * cls_count) <= 1.0


class TestLabelNoise:
    def _ds(self, n=10):
        return Dataset(np.arange(n, dtype=float)[:, None], np.where(np.arange(n) % 3 == 0, 1, -1))

    def test_zero_rate_identity(self):
        ds = self._ds()
        assert inject_label_noise(ds, NoiseSpec(0.0, 1)).labels.tolist() == ds.labels.tolist()

    def test_exact_count(self):
        ds = self._ds()
        noisy = inject_label_noise(ds, NoiseSpec(0.3, 7))
        assert int(np.sum(noisy.labels != ds.labels)) == 3
        np.testing.assert_array_equal(noisy.features, ds.features)

    def test_full_flip(self):
        ds = self._ds()
        assert inject_label_noise(ds, NoiseSpec(1.0, 0)).labels.tolist() == (-ds.labels).tolist()

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 200), st.floats(0, 1), st.integers(0, 2**32 - 1))
    def test_count_involution_determinism(self, n, rate, seed):
        ds = Dataset(np.zeros((n, 1)), np.where(np.arange(n) % 2 == 0, 1, -1))
        spec = NoiseSpec(rate, seed)
        noisy = inject_label_noise(ds, spec)
        assert int(np.sum(noisy.labels != ds.labels)) == int(np.floor(rate * n + 1e-9))
        assert inject_label_noise(noisy, spec).labels.tolist() == ds.labels.tolist()
        assert inject_label_noise(ds, spec).labels.tolist() == noisy.labels.tolist()

    def test_floor_of_awkward_products(self):
        # 0.29 * 100 evaluates to 28.999999999999996 in floating point
        assert len(noise_indices(100, NoiseSpec(0.29, 0))) == 29


def test_gaussian_blobs_shape_and_balance():
    ds = make_gaussian_blobs(501, d=3, separation=4.0, seed=5)
    assert ds.features.shape == (501, 3)
    assert ds.class_counts() == (251, 250)
    mu = ds.features[ds.labels == 1].mean(0) - ds.features[ds.labels == -1].mean(0)
    assert mu[0] == pytest.approx(4.0, abs=0.4)
