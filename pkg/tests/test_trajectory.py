import numpy as np
import pytest

from timelens import TimeSeries, block_hankel, hankel_from_trajectory, trajectory_matrix

from conftest import EXAMPLE_H, EXAMPLE_Z


class TestTrajectoryMatrix:
    def test_worked_example(self, example_series):
        z = trajectory_matrix(example_series, 2, 1)
        assert np.array_equal(z.data, EXAMPLE_Z)
        assert z.n_windows == 3

    def test_identity_window(self, example_series):
        z = trajectory_matrix(example_series, 1, 1)
        assert np.array_equal(z.data, example_series.values)

    def test_stride_two(self, example_series):
        z = trajectory_matrix(example_series, 2, 2)
        assert np.array_equal(z.data, [[1, 10, 2, 20], [3, 30, 4, 40]])

    def test_window_count_formula(self):
        rng = np.random.Generator(np.random.Philox(5))
        ts = TimeSeries(rng.normal(size=(23, 2)))
        for L in (1, 4, 9):
            for s in (1, 2, 3, 5):
                z = trajectory_matrix(ts, L, s)
                assert z.n_windows == (23 - L) // s + 1

    def test_strided_rows_subset_of_dense_rows(self):
        rng = np.random.Generator(np.random.Philox(6))
        ts = TimeSeries(rng.normal(size=(30, 3)))
        dense = trajectory_matrix(ts, 5, 1)
        for s in (2, 3, 4):
            strided = trajectory_matrix(ts, 5, s)
            assert np.array_equal(strided.data, dense.data[::s])

    def test_errors(self, example_series):
        with pytest.raises(ValueError, match="exceeds"):
            trajectory_matrix(example_series, 5, 1)
        with pytest.raises(ValueError, match="stride"):
            trajectory_matrix(example_series, 2, 0)
        with pytest.raises(ValueError, match=">= 1"):
            trajectory_matrix(example_series, 0, 1)


class TestBlockHankel:
    def test_worked_example(self, example_series):
        h = block_hankel(example_series, 2)
        assert np.array_equal(h.data, EXAMPLE_H)

    def test_L1_is_transpose(self, example_series):
        h = block_hankel(example_series, 1)
        assert np.array_equal(h.data, example_series.values.T)

    def test_columns_are_windows(self):
        rng = np.random.Generator(np.random.Philox(7))
        ts = TimeSeries(rng.normal(size=(10, 3)))
        h = block_hankel(ts, 4)
        # oracle: enumerate windows by hand
        for j in range(10 - 4 + 1):
            window = ts.values[j : j + 4].ravel()
            assert np.array_equal(h.data[:, j], window)

    def test_antidiagonal_block_structure(self):
        rng = np.random.Generator(np.random.Philox(8))
        ts = TimeSeries(rng.normal(size=(12, 2)))
        L, D = 5, 2
        h = block_hankel(ts, L)
        for i in range(L - 1):
            for j in range(12 - L):
                upper = h.data[(i + 1) * D : (i + 2) * D, j]
                right = h.data[i * D : (i + 1) * D, j + 1]
                assert np.array_equal(upper, right)

    def test_window_too_long(self, example_series):
        with pytest.raises(ValueError, match="exceeds"):
            block_hankel(example_series, 9)


class TestHankelFromTrajectory:
    def test_transpose_of_example(self, example_series):
        z = trajectory_matrix(example_series, 2, 1)
        h = hankel_from_trajectory(z)
        assert np.array_equal(h.data, EXAMPLE_H)

    def test_L1(self, example_series):
        z = trajectory_matrix(example_series, 1, 1)
        assert np.array_equal(hankel_from_trajectory(z).data, example_series.values.T)

    def test_matches_direct_construction(self):
        rng = np.random.Generator(np.random.Philox(9))
        ts = TimeSeries(rng.normal(size=(17, 2)))
        direct = block_hankel(ts, 5)
        view = hankel_from_trajectory(trajectory_matrix(ts, 5, 1))
        assert np.array_equal(direct.data, view.data)

    def test_strided_rejected(self, example_series):
        z = trajectory_matrix(example_series, 2, 2)
        with pytest.raises(ValueError, match="not a Hankel"):
            hankel_from_trajectory(z)

    def test_transpose_identity_bitwise_random(self):
        rng = np.random.Generator(np.random.Philox(10))
        for _ in range(5):
            T = int(rng.integers(5, 40))
            D = int(rng.integers(1, 4))
            L = int(rng.integers(1, T + 1))
            ts = TimeSeries(rng.normal(size=(T, D)))
            z = trajectory_matrix(ts, L, 1)
            h = block_hankel(ts, L)
            assert np.array_equal(z.data.T, h.data)


def test_json_envelope(example_series):
    z = trajectory_matrix(example_series, 2, 1)
    env = z.to_envelope()
    assert env["rows"] == 3 and env["cols"] == 4
    assert env["L"] == 2 and env["s"] == 1 and env["D"] == 2
    assert env["data"] == [float(x) for x in EXAMPLE_Z.ravel()]
    h_env = block_hankel(example_series, 2).to_envelope()
    assert h_env["rows"] == 4 and h_env["cols"] == 3 and h_env["s"] == 1
