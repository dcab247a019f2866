"""Round participation policies."""

import numpy as np
import pytest

from fedcast.fl import All, Exclude, Random, select_clients

SEVEN = tuple(f"bs{i}" for i in range(7))


class TestAll:
    def test_returns_every_client(self):
        assert select_clients(SEVEN, All(), round_index=0, seed=0) == tuple(sorted(SEVEN))

    def test_ascending_regardless_of_input_order(self):
        shuffled = ("bs3", "bs0", "bs6", "bs1", "bs5", "bs2", "bs4")
        assert select_clients(shuffled, All(), 2, 1) == tuple(sorted(SEVEN))


class TestExclude:
    def test_removes_exactly_one(self):
        chosen = select_clients(SEVEN, Exclude("bs1"), 0, 0)
        assert len(chosen) == 6
        assert "bs1" not in chosen
        assert set(chosen) | {"bs1"} == set(SEVEN)

    def test_unknown_id_rejected(self):
        with pytest.raises(ValueError, match="unknown client"):
            select_clients(SEVEN, Exclude("ghost"), 0, 0)

    def test_sole_client_cannot_be_excluded(self):
        with pytest.raises(ValueError, match="only client"):
            select_clients(("bs0",), Exclude("bs0"), 0, 0)


class TestRandom:
    def test_same_seed_and_round_repeats_exactly(self):
        a = select_clients(SEVEN, Random(3), round_index=4, seed=11)
        b = select_clients(SEVEN, Random(3), round_index=4, seed=11)
        assert a == b
        assert len(a) == 3

    def test_round_changes_the_draw(self):
        draws = {select_clients(SEVEN, Random(3), r, seed=11) for r in range(10)}
        assert len(draws) > 1

    def test_seed_changes_the_draw(self):
        draws = {select_clients(SEVEN, Random(3), 0, seed=s) for s in range(10)}
        assert len(draws) > 1

    def test_without_replacement_and_sorted(self):
        for r in range(20):
            chosen = select_clients(SEVEN, Random(4), r, seed=3)
            assert len(set(chosen)) == 4
            assert list(chosen) == sorted(chosen)
            assert set(chosen) <= set(SEVEN)

    def test_k_equal_to_cohort_selects_everyone(self):
        assert select_clients(SEVEN, Random(7), 0, 0) == tuple(sorted(SEVEN))

    def test_k_larger_than_cohort_rejected(self):
        with pytest.raises(ValueError, match="cannot select 8 of 7"):
            select_clients(SEVEN, Random(8), 0, 0)

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError, match="k_per_round"):
            Random(0)

    def test_independent_of_history(self):
        # round 5's cohort must not depend on rounds 0..4 having been drawn
        fresh = select_clients(SEVEN, Random(2), 5, seed=9)
        after_replay = None
        for r in range(6):
            after_replay = select_clients(SEVEN, Random(2), r, seed=9)
        assert fresh == after_replay


class TestValidation:
    def test_empty_cohort_rejected(self):
        with pytest.raises(ValueError, match="no clients"):
            select_clients((), All(), 0, 0)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            select_clients(("a", "a", "b"), All(), 0, 0)
