"""Synthetic cohort generator: determinism, periodicity, heterogeneity."""

import numpy as np
import pytest

from fedcast.data import (
    FEATURES,
    SyntheticSpec,
    generate_client,
    generate_cohort,
    histogram,
    kl_divergence,
)

RNTI = FEATURES.index("rnti_count")


def quiet_spec(**overrides):
    base = dict(n_clients=2, days=2.0, sample_period_s=60.0,
                events_per_day=0.0, noise_std=0.0, weekly_amplitude=0.0)
    base.update(overrides)
    return SyntheticSpec(**base)


class TestDeterminism:
    def test_same_spec_same_output(self):
        spec = SyntheticSpec(n_clients=3, days=1.0, sample_period_s=300.0,
                             events_per_day=2.0, seed=42)
        a = generate_cohort(spec)
        b = generate_cohort(spec)
        for sa, sb in zip(a, b):
            np.testing.assert_array_equal(sa.values, sb.values)
            np.testing.assert_array_equal(sa.timestamps, sb.timestamps)

    def test_clients_independent_of_cohort_size(self):
        # With pinned phases, a client's draws do not depend on how many
        # other clients exist.
        small = SyntheticSpec(n_clients=2, days=1.0, sample_period_s=300.0,
                              seed=1, phase_offsets=(0.0, 1.0))
        large = SyntheticSpec(n_clients=5, days=1.0, sample_period_s=300.0,
                              seed=1, phase_offsets=(0.0, 1.0, 2.0, 3.0, 4.0))
        np.testing.assert_array_equal(
            generate_client(small, 1).values, generate_client(large, 1).values)

    def test_different_seeds_differ(self):
        a = generate_client(SyntheticSpec(days=1.0, sample_period_s=300.0, seed=0), 0)
        b = generate_client(SyntheticSpec(days=1.0, sample_period_s=300.0, seed=1), 0)
        assert not np.array_equal(a.values, b.values)


class TestShape:
    def test_sample_count_and_timestamps(self):
        spec = quiet_spec(days=1.0)
        series = generate_client(spec, 0)
        assert series.n_rows == 1440  # one day at one-minute cadence
        assert series.timestamps[0] == spec.start_epoch_ms
        assert series.timestamps[1] - series.timestamps[0] == 60_000
        assert series.feature_names == FEATURES

    def test_all_values_nonnegative(self):
        spec = SyntheticSpec(n_clients=2, days=1.0, sample_period_s=60.0,
                             noise_std=0.5, seed=3)
        for series in generate_cohort(spec):
            assert (series.values >= 0.0).all()


class TestPeriodicity:
    def test_quiet_spec_is_exactly_daily_periodic(self):
        series = generate_client(quiet_spec(), 0)
        per_day = 1440
        rnti = series.values[:, RNTI]
        np.testing.assert_array_equal(rnti[:per_day], rnti[per_day:2 * per_day])
        # Every column is driven by the same load curve.
        np.testing.assert_array_equal(series.values[:per_day],
                                      series.values[per_day:2 * per_day])

    def test_mcs_means_fall_as_load_rises(self):
        series = generate_client(quiet_spec(), 0)
        load = series.values[:, RNTI]
        mcs = series.values[:, FEATURES.index("mcs_dl_mean")]
        lo, hi = np.argmin(load), np.argmax(load)
        assert mcs[lo] > mcs[hi]
        assert 16.0 <= mcs.min() and mcs.max() <= 28.0

    def test_phase_offsets_shift_the_peak(self):
        spec = quiet_spec(phase_offsets=(0.0, np.pi))
        a = generate_client(spec, 0).values[:1440, RNTI]
        b = generate_client(spec, 1).values[:1440, RNTI]
        assert abs(int(np.argmax(a)) - int(np.argmax(b))) > 400

    def test_phase_divergence_positive(self):
        spec = quiet_spec(noise_std=0.05, phase_offsets=(0.0, np.pi), seed=5)
        a = generate_client(spec, 0).values[:, RNTI]
        b = generate_client(spec, 1).values[:, RNTI]
        rng = (min(a.min(), b.min()), max(a.max(), b.max()))
        kl = kl_divergence(histogram(a, rng), histogram(b, rng))
        assert kl > 0.0


class TestEvents:
    def test_events_raise_load(self):
        base = generate_client(quiet_spec(seed=9), 0).values[:, RNTI]
        spec = quiet_spec(events_per_day=5.0, event_magnitude=4.0, seed=9)
        surged = generate_client(spec, 0).values[:, RNTI]
        assert surged.max() > base.max() * 2.0
        # Outside surge windows the curve is untouched.
        assert (surged >= base - 1e-12).all()

    def test_zero_intensity_means_no_events(self):
        a = generate_client(quiet_spec(seed=4), 0)
        b = generate_client(quiet_spec(seed=8), 0)
        np.testing.assert_array_equal(a.values, b.values)


class TestValidation:
    def test_amplitudes_must_leave_load_positive(self):
        with pytest.raises(ValueError, match="below 1"):
            SyntheticSpec(daily_amplitude=0.8, weekly_amplitude=0.3)

    def test_base_rate_count(self):
        with pytest.raises(ValueError, match="base rates"):
            SyntheticSpec(n_clients=3, base_rates=(100.0, 200.0)).client_base_rates()

    def test_phase_count(self):
        with pytest.raises(ValueError, match="phase offsets"):
            SyntheticSpec(n_clients=3, phase_offsets=(0.0, 1.0))

    def test_client_index_range(self):
        with pytest.raises(ValueError, match="out of range"):
            generate_client(SyntheticSpec(n_clients=2), 2)

    def test_negative_rates_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            SyntheticSpec(base_rates=-5.0)
