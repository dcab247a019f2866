"""Permutation importance: ablation zero, directional gain, determinism."""

import numpy as np
import pytest

from fedcast.data import RawSeries, chrono_split, make_windows, permutation_importance
from fedcast.nn import LstmConfig, init_params, make_optimizer, train_epochs

CFG = LstmConfig(input_dim=2, target_dim=1, hidden_width=8, ffn_layers=1,
                 ffn_width=8, lookback=5, horizon=1)


def driver_dataset(n=240):
    """Feature 0 carries the signal, feature 1 is a flat distractor."""
    t = np.arange(n, dtype=np.float64)
    signal = 1.5 + np.sin(2.0 * np.pi * t / 20.0)
    values = np.stack([signal, np.ones(n)], axis=1)
    series = RawSeries("c0", (t * 1000).astype(np.int64), values,
                       ("signal", "flat"), split="train")
    return make_windows(series, lookback=CFG.lookback, horizon=CFG.horizon,
                        target_indices=(0,))


def trained_params(dataset, seed=0, epochs=40):
    params = init_params(CFG, seed=seed)
    opt = make_optimizer("adam", lr=1e-2)
    params, _, _ = train_epochs(params, dataset.inputs, dataset.targets,
                                epochs=epochs, opt_state=opt)
    return params


class TestImportance:
    def test_ablated_feature_scores_zero(self):
        dataset = driver_dataset()
        params = init_params(CFG, seed=3)
        params.layers[0].W[:, 1] = 0.0  # the model provably ignores feature 1
        assert abs(permutation_importance(params, dataset, 1, seed=0)) <= 1e-6

    def test_dominant_feature_scores_positive(self):
        dataset = driver_dataset()
        params = trained_params(dataset)
        for seed in range(10):
            assert permutation_importance(params, dataset, 0, seed=seed) > 0.0

    def test_constant_distractor_scores_zero(self):
        dataset = driver_dataset()
        params = trained_params(dataset)
        # Permuting identical column values cannot move the predictions.
        assert permutation_importance(params, dataset, 1, seed=0) == 0.0

    def test_deterministic_given_seed(self):
        dataset = driver_dataset()
        params = trained_params(dataset)
        a = permutation_importance(params, dataset, 0, seed=7)
        b = permutation_importance(params, dataset, 0, seed=7)
        assert a == b

    def test_inputs_not_mutated(self):
        dataset = driver_dataset()
        params = trained_params(dataset)
        before = dataset.inputs.copy()
        permutation_importance(params, dataset, 0, seed=1)
        np.testing.assert_array_equal(dataset.inputs, before)

    def test_feature_index_out_of_range(self):
        dataset = driver_dataset()
        params = init_params(CFG, seed=0)
        with pytest.raises(ValueError, match="out of range"):
            permutation_importance(params, dataset, 2, seed=0)
