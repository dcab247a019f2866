"""Model-agnostic feature relevance by column permutation.

Shuffling one input feature across windows (keeping its within-window
shape) breaks its alignment with the targets; the rise in prediction
error is that feature's importance. A feature the model ignores scores
zero, because the predictions do not move at all.
"""

from __future__ import annotations

import numpy as np

from ..metrics import nrmse
from ..nn import ModelParams, predict
from .scaling import Scaler, inverse_transform_targets
from .windows import WindowedDataset


def permutation_importance(params: ModelParams, dataset: WindowedDataset,
                           feature_index: int, seed: int,
                           scaler: Scaler | None = None) -> float:
    """NRMSE with the feature permuted minus NRMSE intact.

    With a scaler given, both error terms are computed on the original
    scale; the difference is deterministic given the seed.
    """
    d = dataset.inputs.shape[2]
    if not 0 <= feature_index < d:
        raise ValueError(f"feature index {feature_index} out of range for {d} features")
    if dataset.n_windows == 0:
        raise ValueError("cannot score an empty dataset")

    truth = dataset.targets.astype(np.float64)
    if scaler is not None:
        truth = inverse_transform_targets(scaler, dataset.target_indices, truth)

    def score(inputs: np.ndarray) -> float:
        pred = predict(params, inputs).astype(np.float64)
        if scaler is not None:
            pred = inverse_transform_targets(scaler, dataset.target_indices, pred)
        return nrmse(pred, truth)

    base = score(dataset.inputs)
    rng = np.random.default_rng(seed)
    permuted = dataset.inputs.copy()
    permuted[:, :, feature_index] = dataset.inputs[
        rng.permutation(dataset.n_windows), :, feature_index]
    return score(permuted) - base
