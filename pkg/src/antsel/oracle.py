"""Exhaustive search over every ``n_t``-subset of the transmit antennas."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations

from .capacity import AntennaSubset, Snr, ergodic_capacity
from .channel import RealizationBatch
from .errors import BudgetError, ConfigurationError

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class OracleResult:
    best_subset: AntennaSubset
    best_capacity: float
    subsets_evaluated: int
    ranked: tuple[tuple[AntennaSubset, float], ...] | None = None

    def to_dict(self) -> dict:
        return {
            "best_subset": list(self.best_subset.positions),
            "best_capacity": self.best_capacity,
            "subsets_evaluated": self.subsets_evaluated,
            "n_tx": self.best_subset.n_tx,
            "n_t": self.best_subset.n_t,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def ranked_csv(self) -> str:
        if self.ranked is None:
            raise ValueError("ranked list was not requested")
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["rank", "subset", "capacity"])
        for r, (subset, cap) in enumerate(self.ranked):
            w.writerow([r, str(subset), f"{cap:.6f}"])
        return out.getvalue()


def exhaustive_search(
    batch: RealizationBatch,
    n_t: int,
    snr: Snr,
    budget: int = DEFAULT_BUDGET,
    keep_ranked: bool = False,
) -> OracleResult:
    """Evaluate every subset in lexicographic order; the first maximizer wins ties."""
    n_tx = batch.n_tx
    if not 1 <= n_t <= n_tx:
        raise ConfigurationError(f"n_t={n_t} must lie in [1, {n_tx}]")
    total = math.comb(n_tx, n_t)
    if total > budget:
        raise BudgetError(total, budget)

    best_subset, best_cap = None, -math.inf
    scored = []
    for positions in combinations(range(n_tx), n_t):
        subset = AntennaSubset(positions, n_tx)
        cap = ergodic_capacity(batch, subset, snr).bits_per_s_per_hz
        if cap > best_cap:
            best_subset, best_cap = subset, cap
        if keep_ranked:
            scored.append((subset, cap))

    ranked = None
    if keep_ranked:
        # stable sort keeps lexicographic order among equal capacities
        ranked = tuple(sorted(scored, key=lambda t: -t[1]))
    return OracleResult(best_subset, best_cap, total, ranked)
