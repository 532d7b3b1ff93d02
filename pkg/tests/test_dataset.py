import numpy as np
import pytest

from gpmal.data import (
    DataError,
    load_csv,
    save_csv,
    scale_min_max,
    scaling_params,
    apply_scaling,
)

from conftest import make_dataset


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_small_file(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,4\n5,6\n")
        ds = load_csv(path)
        assert ds.n == 3 and ds.d == 2
        assert ds.feature_names == ("a", "b")
        np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4], [5, 6]])
        assert ds.labels is None

    def test_wine_shape(self, wine_raw):
        assert wine_raw.n == 178
        assert wine_raw.d == 13
        assert len(wine_raw.label_names) == 3

    def test_label_by_name(self, tmp_path):
        path = write(tmp_path, "x,y,cls\n1,2,a\n3,4,b\n")
        ds = load_csv(path, "cls")
        assert ds.d == 2
        assert list(ds.labels) == [0, 1]
        assert ds.label_names == ("a", "b")

    def test_label_last(self, tmp_path):
        path = write(tmp_path, "x,cls\n1,a\n2,b\n3,a\n")
        ds = load_csv(path, "last")
        assert ds.d == 1
        assert list(ds.labels) == [0, 1, 0]

    def test_nan_cell_rejected(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,NaN\n")
        with pytest.raises(DataError, match="row 3.*'b'"):
            load_csv(path)

    def test_non_numeric_cell(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\nx,4\n")
        with pytest.raises(DataError, match="row 3.*'a'"):
            load_csv(path)

    def test_ragged_row(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3\n")
        with pytest.raises(DataError, match="row 3"):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(DataError, match="empty"):
            load_csv(path)

    def test_missing_label_column(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,4\n")
        with pytest.raises(DataError, match="nope"):
            load_csv(path, "nope")

    def test_single_class_rejected(self, tmp_path):
        path = write(tmp_path, "a,cls\n1,z\n2,z\n")
        with pytest.raises(DataError, match="2 distinct classes"):
            load_csv(path, "cls")


class TestScaling:
    def test_linear_map(self):
        ds = make_dataset([[0.0], [5.0], [10.0]])
        scaled = scale_min_max(ds)
        np.testing.assert_array_equal(scaled.features[:, 0], [0.0, 0.5, 1.0])

    def test_constant_column_to_zero(self):
        ds = make_dataset([[7.0, 1.0], [7.0, 2.0], [7.0, 3.0]])
        scaled = scale_min_max(ds)
        np.testing.assert_array_equal(scaled.features[:, 0], [0.0, 0.0, 0.0])

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        ds = make_dataset(rng.normal(size=(20, 4)) * 10)
        once = scale_min_max(ds)
        twice = scale_min_max(once)
        np.testing.assert_array_equal(once.features, twice.features)

    def test_range_and_order_preserved(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(50, 3)) * 7 - 2
        scaled = scale_min_max(make_dataset(x)).features
        assert scaled.min() >= 0.0 and scaled.max() <= 1.0
        for c in range(3):
            assert (np.argsort(x[:, c], kind="stable")
                    == np.argsort(scaled[:, c], kind="stable")).all()

    def test_labels_preserved(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,cls\n1,p\n2,q\n3,p\n")
        ds = load_csv(path, "cls")
        scaled = scale_min_max(ds)
        np.testing.assert_array_equal(scaled.labels, ds.labels)
        assert scaled.label_names == ds.label_names

    def test_apply_scaling_out_of_range_not_clamped(self):
        mins = np.array([0.0])
        maxs = np.array([10.0])
        out = apply_scaling(np.array([[20.0], [-10.0]]), mins, maxs)
        np.testing.assert_array_equal(out[:, 0], [2.0, -1.0])


class TestRoundTrip:
    def test_save_load_bit_identical(self, tmp_path):
        rng = np.random.default_rng(5)
        ds = make_dataset(rng.normal(size=(17, 3)), labels=list("ababababababababa"))
        path = tmp_path / "out.csv"
        save_csv(ds, path)
        back = load_csv(path, "last")
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_wine_round_trip(self, wine_raw, tmp_path):
        path = tmp_path / "wine2.csv"
        save_csv(wine_raw, path)
        back = load_csv(path, "last")
        np.testing.assert_array_equal(back.features, wine_raw.features)

    def test_scaling_params_survive(self, wine_raw):
        mins, maxs = scaling_params(wine_raw)
        scaled = apply_scaling(wine_raw.features, mins, maxs)
        np.testing.assert_array_equal(
            scaled, scale_min_max(wine_raw).features
        )
