"""Which clients participate in a round.

Selection is deterministic given (seed, round): any round's cohort can
be reproduced in isolation without replaying earlier rounds. Returned
ids are always in ascending order, the canonical accumulation order for
aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class All:
    pass


@dataclass(frozen=True)
class Random:
    k_per_round: int

    def __post_init__(self) -> None:
        if self.k_per_round < 1:
            raise ValueError(f"k_per_round must be >= 1, got {self.k_per_round}")


@dataclass(frozen=True)
class Exclude:
    client_id: str


SelectionPolicy = All | Random | Exclude


def select_clients(client_ids: Sequence[str], policy: SelectionPolicy,
                   round_index: int, seed: int) -> tuple[str, ...]:
    ids = sorted(client_ids)
    if len(ids) == 0:
        raise ValueError("no clients to select from")
    if len(set(ids)) != len(ids):
        raise ValueError("client ids must be unique")
    if isinstance(policy, All):
        return tuple(ids)
    if isinstance(policy, Random):
        if policy.k_per_round > len(ids):
            raise ValueError(
                f"cannot select {policy.k_per_round} of {len(ids)} clients")
        rng = np.random.default_rng([seed, round_index])
        chosen = rng.choice(len(ids), size=policy.k_per_round, replace=False)
        return tuple(ids[i] for i in sorted(chosen))
    if isinstance(policy, Exclude):
        if policy.client_id not in ids:
            raise ValueError(f"cannot exclude unknown client {policy.client_id!r}")
        remaining = tuple(i for i in ids if i != policy.client_id)
        if not remaining:
            raise ValueError("excluding the only client leaves nobody to train")
        return remaining
    raise ValueError(f"unknown selection policy {policy!r}")
