import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sta.data import (
    Cluster,
    ClusterSpec,
    Dataset,
    apply_normalization,
    bundled_dataset,
    gen_gaussian_clusters,
    gen_preset,
    load_csv,
    normalize,
    one_hot,
    one_hot_matrix,
    save_csv,
)
from sta.errors import DataError, InvalidArgumentError, UnknownDatasetError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_labelled(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,class\n1,2,x\n3,4,y\n5,6,x\n"), label_column="class")
        assert (ds.n, ds.d, ds.num_classes) == (3, 2, 2)
        assert ds.class_names == ("x", "y")
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])
        assert ds.feature_names == ("a", "b")

    def test_label_column_in_the_middle(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,class,b\n1,q,2\n3,p,4\n"), label_column="class")
        np.testing.assert_array_equal(ds.X, [[1, 2], [3, 4]])
        assert ds.class_names == ("q", "p")

    def test_unlabelled(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b\n1,2\n3,4\n"))
        assert ds.labels is None and ds.num_classes == 0

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(DataError, match=r"line 3.*column 'b'"):
            load_csv(write(tmp_path, "a,b\n1,2\n3,abc\n"))

    def test_ragged(self, tmp_path):
        with pytest.raises(DataError, match="line 2"):
            load_csv(write(tmp_path, "a,b\n1,2,3\n"))

    def test_missing_column(self, tmp_path):
        with pytest.raises(DataError, match="label column"):
            load_csv(write(tmp_path, "a,b\n1,2\n"), label_column="class")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv")

    def test_round_trip(self, tmp_path):
        ds = gen_preset("toy3", seed=3)
        back = load_csv(save_csv(ds, tmp_path / "t.csv"), label_column="class")
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.labels, ds.labels)


class TestNormalize:
    def test_examples(self):
        raw = Dataset(np.array([[2.0, 7.0, 0.0], [4.0, 7.0, 0.25], [6.0, 7.0, 1.0]]))
        ds = normalize(raw)
        np.testing.assert_array_equal(ds.X[:, 0], [0, 0.5, 1])
        np.testing.assert_array_equal(ds.X[:, 1], [0.5, 0.5, 0.5])
        np.testing.assert_array_equal(ds.X[:, 2], [0, 0.25, 1])
        np.testing.assert_array_equal(ds.norm_min, [2, 7, 0])
        np.testing.assert_array_equal(ds.norm_max, [6, 7, 1])

    @settings(max_examples=60)
    @given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 5)), elements=st.floats(-1e6, 1e6)))
    def test_idempotent_and_bounded(self, X):
        once = normalize(Dataset(X))
        assert np.all((once.X >= 0) & (once.X <= 1))
        twice = normalize(once)
        np.testing.assert_allclose(twice.X, once.X, rtol=0, atol=1e-12)

    def test_apply_with_stored_range(self):
        raw = Dataset(np.array([[0.0, 1.0], [10.0, 1.0]]))
        out = apply_normalization(Dataset(np.array([[5.0, 3.0], [20.0, 1.0]])), [0.0, 1.0], [10.0, 1.0])
        np.testing.assert_array_equal(out.X, [[0.5, 0.5], [2.0, 0.5]])
        with pytest.raises(DataError):
            apply_normalization(raw, [0.0], [1.0])


class TestOneHot:
    def test_examples(self):
        np.testing.assert_array_equal(one_hot(0, 3), [1, 0, 0])
        np.testing.assert_array_equal(one_hot(2, 3), [0, 0, 1])

    @given(st.integers(1, 12).flatmap(lambda C: st.tuples(st.integers(0, C - 1), st.just(C))))
    def test_sums_to_one(self, args):
        label, C = args
        v = one_hot(label, C)
        assert v.sum() == 1.0 and v[label] == 1.0

    def test_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            one_hot(3, 3)
        with pytest.raises(InvalidArgumentError):
            one_hot_matrix([0, -1], 2)

    def test_targets_are_one_hot(self):
        T = bundled_dataset("iris").targets()
        assert T.shape == (150, 3)
        assert set(np.unique(T)) == {0.0, 1.0}
        np.testing.assert_array_equal(T.sum(axis=1), np.ones(150))


class TestGenerators:
    def test_counts(self):
        spec = ClusterSpec(tuple(Cluster((0.0, float(i)), 1.0, 50, i % 2) for i in range(4)))
        assert gen_gaussian_clusters(spec, 0).n == 200

    def test_presets_share_features(self):
        a, b = gen_preset("toy3", 11), gen_preset("toy4", 11)
        np.testing.assert_array_equal(a.X, b.X)
        assert a.num_classes == 3 and b.num_classes == 4
        assert not np.array_equal(a.labels, b.labels)
        assert a.n == 400

    def test_deterministic(self):
        np.testing.assert_array_equal(gen_preset("toy3", 5).X, gen_preset("toy3", 5).X)
        assert not np.array_equal(gen_preset("toy3", 5).X, gen_preset("toy3", 6).X)

    def test_sample_mean(self):
        mean, sd = (1.0, -2.0, 3.0), 0.7
        ds = gen_gaussian_clusters(ClusterSpec((Cluster(mean, sd, 10000, 0),)), 9)
        assert np.all(np.abs(ds.X.mean(axis=0) - mean) < 5 * sd / np.sqrt(10000))

    def test_bad_specs(self):
        with pytest.raises(InvalidArgumentError):
            ClusterSpec((Cluster((0.0,), 1.0, 10, 1),))
        with pytest.raises(InvalidArgumentError):
            ClusterSpec((Cluster((0.0,), 1.0, 0, 0),))
        with pytest.raises(UnknownDatasetError):
            gen_preset("toy5")


class TestBundled:
    def test_iris(self):
        ds = bundled_dataset("iris")
        assert (ds.n, ds.d, ds.num_classes) == (150, 4, 3)
        assert ds.class_names == ("setosa", "versicolor", "virginica")

    def test_wine(self):
        ds = bundled_dataset("wine")
        assert (ds.n, ds.d, ds.num_classes) == (178, 13, 3)
        np.testing.assert_array_equal(np.bincount(ds.labels), [59, 71, 48])

    def test_unknown(self):
        with pytest.raises(UnknownDatasetError):
            bundled_dataset("mnist-full")

    def test_data_dir_override(self, tmp_path, monkeypatch):
        (tmp_path / "iris.csv").write_text("a,class\n1,u\n2,v\n")
        monkeypatch.setenv("STA_DATA_DIR", str(tmp_path))
        assert bundled_dataset("iris").n == 2
