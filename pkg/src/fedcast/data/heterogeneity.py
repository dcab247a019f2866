"""How different two clients' data distributions are.

Each feature is summarised as a smoothed 50-bin histogram over the pair's
joint value range, compared with Kullback-Leibler divergence, and the
per-feature divergences are averaged. The result is asymmetric: KL(P, Q)
weights disagreement by P, so the matrix is read row-conditioned-on-column.
"""

from __future__ import annotations

import numpy as np

N_BINS = 50
SMOOTHING = 1e-9


def histogram(values: np.ndarray, value_range: tuple[float, float],
              bins: int = N_BINS) -> np.ndarray:
    """Smoothed probability histogram of a 1-D sample over a fixed range.

    Values outside the range are clipped into the edge bins rather than
    dropped, and every bin gets a small additive floor so divergences
    stay finite.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot histogram an empty sample")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise ValueError(f"bad value range ({lo}, {hi})")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    pos = (np.clip(values, lo, hi) - lo) / (hi - lo) * bins
    idx = np.minimum(pos.astype(np.intp), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(np.float64)
    smoothed = counts + SMOOTHING
    return smoothed / smoothed.sum()


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(P, Q) in nats for two probability vectors over the same bins."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"need two equal-length vectors, got {p.shape} and {q.shape}")
    if (p < 0).any() or (q < 0).any():
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError(
            f"probability vectors must sum to 1, got {p.sum()!r} and {q.sum()!r}")
    support = p > 0.0
    if (q[support] == 0.0).any():
        return float("inf")
    terms = p[support] * np.log(p[support] / q[support])
    # Rounding can leave a tiny negative residue when P ~= Q.
    return max(float(terms.sum()), 0.0)


def kl_matrix(client_values: list[np.ndarray],
              feature_indices: tuple[int, ...] | None = None,
              bins: int = N_BINS) -> np.ndarray:
    """Pairwise divergence averaged over features.

    entry [i, j] = mean_f KL(hist of client i's feature f, hist of client
    j's feature f), both histograms built over the union of the two
    clients' ranges for that feature. A feature constant and equal across
    the pair has no range to bin and contributes zero. feature_indices
    restricts the average to a column subset, default all columns.
    """
    if len(client_values) == 0:
        raise ValueError("need at least one client")
    mats = [np.asarray(v, dtype=np.float64) for v in client_values]
    n_cols = mats[0].shape[1] if mats[0].ndim == 2 else -1
    for m in mats:
        if m.ndim != 2 or m.shape[1] != n_cols:
            raise ValueError("every client needs the same (rows, features) layout")
        if m.shape[0] == 0:
            raise ValueError("cannot histogram an empty client")
        if not np.isfinite(m).all():
            raise ValueError("client values must be finite")
    if feature_indices is None:
        features = tuple(range(n_cols))
    else:
        features = tuple(int(f) for f in feature_indices)
        if len(features) == 0 or any(f < 0 or f >= n_cols for f in features):
            raise ValueError(
                f"feature indices {list(features)} out of range for {n_cols} columns")
    d = len(features)
    k = len(mats)
    lows = np.stack([m.min(axis=0) for m in mats])   # (k, d)
    highs = np.stack([m.max(axis=0) for m in mats])
    out = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            total = 0.0
            for f in features:
                lo = min(lows[i, f], lows[j, f])
                hi = max(highs[i, f], highs[j, f])
                if lo == hi:
                    continue  # both constant at the same value
                p = histogram(mats[i][:, f], (lo, hi), bins=bins)
                q = histogram(mats[j][:, f], (lo, hi), bins=bins)
                total += kl_divergence(p, q)
            out[i, j] = total / d
    return out
