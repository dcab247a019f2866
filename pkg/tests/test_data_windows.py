"""Chronological splits and sliding-window extraction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedcast.data import RawSeries, chrono_split, make_windows


def series_of(n, d=2, split="train"):
    # Row i holds the value i in every feature, so window contents are
    # checkable by eye.
    values = np.tile(np.arange(n, dtype=np.float64)[:, None], (1, d))
    ts = np.arange(n, dtype=np.int64) * 1000
    names = tuple(f"f{i}" for i in range(d))
    return RawSeries("c0", ts, values, names, split=split)


class TestChronoSplit:
    def test_ten_rows(self):
        train, val, test = chrono_split(series_of(10, split=None))
        assert (train.n_rows, val.n_rows, test.n_rows) == (6, 2, 2)
        assert (train.split, val.split, test.split) == ("train", "val", "test")

    def test_seven_rows_floor_rule(self):
        train, val, test = chrono_split(series_of(7, split=None))
        assert (train.n_rows, val.n_rows, test.n_rows) == (4, 1, 2)

    def test_fifteen_rows_exact_boundary(self):
        # 0.6 * 15 = 9 exactly; one-ulp-low floats must not floor it to 8.
        train, val, test = chrono_split(series_of(15, split=None))
        assert (train.n_rows, val.n_rows, test.n_rows) == (9, 3, 3)

    def test_chronological_order(self):
        train, val, test = chrono_split(series_of(10, split=None))
        assert train.timestamps.max() < val.timestamps.min() < test.timestamps.min()

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            chrono_split(series_of(10, split=None), fractions=(0.5, 0.2, 0.2))

    def test_fractions_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            chrono_split(series_of(10, split=None), fractions=(1.0, 0.0, 0.0))

    def test_empty_partition_rejected(self):
        with pytest.raises(ValueError, match="empty partition"):
            chrono_split(series_of(2, split=None))

    @given(st.integers(min_value=5, max_value=500))
    @settings(max_examples=50, deadline=None)
    def test_partition_covers_series(self, n):
        series = series_of(n, split=None)
        train, val, test = chrono_split(series)
        assert train.n_rows + val.n_rows + test.n_rows == n
        rebuilt = np.concatenate([train.values, val.values, test.values])
        np.testing.assert_array_equal(rebuilt, series.values)


class TestMakeWindows:
    def test_single_window(self):
        ds = make_windows(series_of(13), lookback=10, horizon=3, target_indices=(0,))
        assert ds.n_windows == 1
        assert ds.inputs.shape == (1, 10, 2)
        assert ds.targets.shape == (1, 3, 1)

    def test_three_windows_enumerated(self):
        ds = make_windows(series_of(15), lookback=10, horizon=3, target_indices=(0, 1))
        assert ds.n_windows == 3
        for k in range(3):
            np.testing.assert_array_equal(ds.inputs[k, :, 0], np.arange(k, k + 10))
            np.testing.assert_array_equal(ds.targets[k, :, 0],
                                          np.arange(k + 10, k + 13))
        # Chronological: each window starts one step after the previous.
        assert (np.diff(ds.inputs[:, 0, 0]) == 1.0).all()

    def test_target_restriction(self):
        values = np.stack([np.arange(13.0), np.arange(13.0) * 10], axis=1)
        series = RawSeries("c0", np.arange(13, dtype=np.int64), values,
                           ("f0", "f1"), split="train")
        ds = make_windows(series, lookback=10, horizon=3, target_indices=(1,))
        np.testing.assert_array_equal(ds.targets[0, :, 0], [100.0, 110.0, 120.0])

    def test_target_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            make_windows(series_of(13), lookback=10, horizon=3, target_indices=(5,))

    def test_too_short(self):
        with pytest.raises(ValueError, match="cannot fit one window"):
            make_windows(series_of(12), lookback=10, horizon=3, target_indices=(0,))

    def test_split_tag_required(self):
        with pytest.raises(ValueError, match="chrono_split first"):
            make_windows(series_of(13, split=None), lookback=10, horizon=3,
                         target_indices=(0,))

    def test_dtype_and_metadata(self):
        ds = make_windows(series_of(13), lookback=10, horizon=3, target_indices=(0,))
        assert ds.inputs.dtype == np.float32
        assert ds.targets.dtype == np.float32
        assert ds.client_id == "c0"
        assert ds.split == "train"
        assert ds.lookback == 10
        assert ds.horizon == 3

    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=6),
           st.integers(min_value=0, max_value=40))
    @settings(max_examples=50, deadline=None)
    def test_window_count_formula(self, lookback, horizon, extra):
        n = lookback + horizon + extra
        ds = make_windows(series_of(n), lookback=lookback, horizon=horizon,
                          target_indices=(0,))
        assert ds.n_windows == n - lookback - horizon + 1
