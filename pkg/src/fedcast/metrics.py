"""Error metrics, the FLOP-based energy model, and the sustainability score.

Errors pool every entry of every window: MAE is the mean absolute
residual, NRMSE the root-mean-squared residual divided by the mean true
value. Energy converts FLOP counts to watt-hours through a configurable
joules-per-FLOP constant; absolute numbers are a calibration knob, only
ratios between settings carry meaning.

The sustainability score multiplies a training-phase term and an
inference-phase term, each a product of powers of shifted inputs:

    S_Tr  = (1 + E_Val)^alpha * (1 + C_Tr)^beta * (1 + DS)^gamma
    S_Inf = (1 + E_Test)^alpha_inf * (1 + C_Inf)^beta_inf

Lower is better. The inference term also has a strict unshifted mode
(E^a * C^b); the shifted form is the default because it is the one whose
numbers are internally consistent across published settings. Weight
vectors are accepted when they sum to 1 within 0.015, admitting the
conventional rounded equal split (0.33, 0.33, 0.33).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

JOULES_PER_FLOP = 1e-9
WEIGHT_SUM_TOL = 0.015


def mae(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean absolute error pooled over all entries."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs truth {truth.shape}")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction")
    return float(np.abs(pred - truth).mean())


def nrmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Root-mean-squared error divided by the mean of the true values.

    Pooled over all entries; the normalizer is the plain mean, so the
    metric is invariant to scaling pred and truth together.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs truth {truth.shape}")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction")
    norm = float(truth.mean())
    if abs(norm) < 1e-12:
        raise ValueError(
            "true values average to zero, the NRMSE normalizer is degenerate")
    rmse = float(np.sqrt(np.mean((pred - truth) ** 2)))
    return rmse / norm


def energy_wh(flops: float, joules_per_flop: float = JOULES_PER_FLOP) -> float:
    """Watt-hours for a FLOP count at a fixed energy cost per FLOP."""
    if flops < 0 or joules_per_flop < 0:
        raise ValueError("flops and joules_per_flop must be nonnegative")
    return flops * joules_per_flop / 3600.0


@dataclass(frozen=True)
class EnergyLedger:
    """FLOP and data-volume bookkeeping for one run.

    ds_kb is the transmitted-data term: total model traffic for a
    federated run, raw training-set size for a centralized run, zero for
    purely local training.
    """

    train_flops: float = 0.0
    inference_flops: float = 0.0
    ds_kb: float = 0.0
    joules_per_flop: float = JOULES_PER_FLOP

    def __post_init__(self) -> None:
        if min(self.train_flops, self.inference_flops, self.ds_kb,
               self.joules_per_flop) < 0:
            raise ValueError("ledger fields must be nonnegative")

    @property
    def c_tr(self) -> float:
        """Training energy in Wh."""
        return energy_wh(self.train_flops, self.joules_per_flop)

    @property
    def c_inf(self) -> float:
        """Inference energy in Wh."""
        return energy_wh(self.inference_flops, self.joules_per_flop)

    def __add__(self, other: "EnergyLedger") -> "EnergyLedger":
        if self.joules_per_flop != other.joules_per_flop:
            raise ValueError("cannot add ledgers with different energy constants")
        return EnergyLedger(
            train_flops=self.train_flops + other.train_flops,
            inference_flops=self.inference_flops + other.inference_flops,
            ds_kb=self.ds_kb + other.ds_kb,
            joules_per_flop=self.joules_per_flop,
        )


@dataclass(frozen=True)
class SustainabilityWeights:
    alpha: float = 0.33
    beta: float = 0.33
    gamma: float = 0.33
    alpha_inf: float = 0.5
    beta_inf: float = 0.5

    def __post_init__(self) -> None:
        fields = (self.alpha, self.beta, self.gamma, self.alpha_inf, self.beta_inf)
        if min(fields) < 0:
            raise ValueError("sustainability weights must be nonnegative")
        train_sum = self.alpha + self.beta + self.gamma
        if abs(train_sum - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"training weights sum to {train_sum}, must be 1 within {WEIGHT_SUM_TOL}")
        inf_sum = self.alpha_inf + self.beta_inf
        if abs(inf_sum - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"inference weights sum to {inf_sum}, must be 1 within {WEIGHT_SUM_TOL}")


def s_train(e_val: float, c_tr: float, ds: float,
            weights: SustainabilityWeights = SustainabilityWeights()) -> float:
    if min(e_val, c_tr, ds) < 0:
        raise ValueError("sustainability inputs must be nonnegative")
    return float((1.0 + e_val) ** weights.alpha
                 * (1.0 + c_tr) ** weights.beta
                 * (1.0 + ds) ** weights.gamma)


def s_inference(e_test: float, c_inf: float,
                weights: SustainabilityWeights = SustainabilityWeights(),
                strict: bool = False) -> float:
    if min(e_test, c_inf) < 0:
        raise ValueError("sustainability inputs must be nonnegative")
    if strict:
        return float(e_test ** weights.alpha_inf * c_inf ** weights.beta_inf)
    return float((1.0 + e_test) ** weights.alpha_inf
                 * (1.0 + c_inf) ** weights.beta_inf)


def sustainability(s_tr: float, s_inf: float) -> float:
    if s_tr < 0 or s_inf < 0:
        raise ValueError("sustainability terms must be nonnegative")
    return s_tr * s_inf


def seed_aggregate(values) -> tuple[float, float]:
    """Mean and population standard deviation across seeds."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot aggregate zero seeds")
    return float(arr.mean()), float(arr.std())
