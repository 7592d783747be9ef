import json
import math

import numpy as np
import pytest

from antsel.capacity import AntennaSubset, Snr, ergodic_capacity
from antsel.channel import ChannelConfig, RealizationBatch, generate_batch
from antsel.errors import BudgetError, ConfigurationError
from antsel.ga import GaConfig, run
from antsel.oracle import exhaustive_search

SNR = Snr(15)


def test_single_subset():
    batch = generate_batch(ChannelConfig(2, 2, 4, 2), 5, seed=0)
    res = exhaustive_search(batch, 2, SNR)
    assert res.best_subset.positions == (0, 1)
    assert res.subsets_evaluated == 1


def test_count_and_ranking():
    batch = generate_batch(ChannelConfig(4, 3, 4, 2), 5, seed=1)
    res = exhaustive_search(batch, 2, SNR, keep_ranked=True)
    assert res.subsets_evaluated == 6
    assert len({s.positions for s, _ in res.ranked}) == 6
    caps = [c for _, c in res.ranked]
    assert caps == sorted(caps, reverse=True)
    assert res.best_capacity == caps[0] == max(caps)
    for subset, cap in res.ranked:
        assert cap == ergodic_capacity(batch, subset, SNR).bits_per_s_per_hz


def test_symmetric_channel_returns_first():
    cfg = ChannelConfig(5, 2, 2, 1)
    c = np.full((2, 5), 0.7 + 0.2j)
    batch = RealizationBatch(cfg, 0, np.broadcast_to(c, (1, 1, 2, 5)),
                             np.broadcast_to(c, (1, 2, 2, 5)))
    res = exhaustive_search(batch, 3, SNR, keep_ranked=True)
    assert res.best_subset.positions == (0, 1, 2)
    assert len({c for _, c in res.ranked}) == 1
    assert [s.positions for s, _ in res.ranked][:2] == [(0, 1, 2), (0, 1, 3)]


def test_budget():
    batch = generate_batch(ChannelConfig(10, 2, 2, 1), 1, seed=0)
    with pytest.raises(BudgetError) as err:
        exhaustive_search(batch, 5, SNR, budget=100)
    assert "252" in str(err.value)
    with pytest.raises(ConfigurationError):
        exhaustive_search(batch, 11, SNR)


def test_dominates_ga():
    ch = ChannelConfig(10, 10, 8, 3, seed=4)
    batch = generate_batch(ch, 30, seed=4)
    res = exhaustive_search(batch, 8, SNR)
    assert res.subsets_evaluated == math.comb(10, 8) == 45
    for seed in range(3):
        best, _ = run(ch, GaConfig(subset_size=8, seed=seed, population_size=4,
                                   max_generations=2), SNR, batch=batch)
        assert res.best_capacity >= best.fitness
        assert (res.best_capacity == best.fitness) == (best.subset == res.best_subset)


def test_exports():
    batch = generate_batch(ChannelConfig(4, 3, 4, 2), 5, seed=1)
    res = exhaustive_search(batch, 2, SNR, keep_ranked=True)
    d = json.loads(res.to_json())
    assert d["subsets_evaluated"] == 6 and d["best_subset"] == list(res.best_subset.positions)
    lines = res.ranked_csv().splitlines()
    assert lines[0] == "rank,subset,capacity" and len(lines) == 7
    assert lines[1].split(",")[1] == str(res.best_subset)
    with pytest.raises(ValueError):
        exhaustive_search(batch, 2, SNR).ranked_csv()
    assert isinstance(res.best_subset, AntennaSubset)
