"""Genetic algorithm for transmit-antenna subset selection.

A chromosome is a length-``n_tx`` boolean mask with exactly ``subset_size``
ones. One generation is: shuffle the parents into adjacent pairs,
single-point crossover (then random cardinality repair), mutate every child,
evaluate, and keep the best ``population_size`` of parents + children.

Two mutation operators are available. ``plain`` swaps one random active
antenna with one random inactive antenna. ``adaptive`` treats every active
antenna as a feasible mutation point, scores a cardinality-preserving move at
each of them and commits only the best one (or keeps the child when every
move is worse).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .capacity import AntennaSubset, Snr, ergodic_capacity
from .channel import ChannelConfig, RealizationBatch, generate_batch
from .errors import ConfigurationError, DimensionError


class MutationStrategy(str, Enum):
    PLAIN = "plain"
    ADAPTIVE = "adaptive"


class PartnerMode(str, Enum):
    RANDOM_ZERO = "random_zero"
    BEST_SWAP = "best_swap"


def _coerce_enum(enum_cls, value, name):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(repr(m.value) for m in enum_cls)
        raise ConfigurationError(f"{name} must be one of {allowed}, got {value!r}") from None


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    subset_size: int = 2
    crossover_rate: float = 0.5
    max_generations: int = 30
    mutation_strategy: MutationStrategy = MutationStrategy.ADAPTIVE
    adaptive_partner_mode: PartnerMode = PartnerMode.BEST_SWAP
    seed: int = 0
    fitness_batch_size: int = 100

    def __post_init__(self):
        object.__setattr__(
            self,
            "mutation_strategy",
            _coerce_enum(MutationStrategy, self.mutation_strategy, "mutation_strategy"),
        )
        object.__setattr__(
            self,
            "adaptive_partner_mode",
            _coerce_enum(PartnerMode, self.adaptive_partner_mode, "adaptive_partner_mode"),
        )
        for name in ("population_size", "subset_size", "max_generations", "seed",
                     "fitness_batch_size"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        if self.population_size < 2 or self.population_size % 2:
            raise ConfigurationError(
                f"population_size must be even and >= 2, got {self.population_size}"
            )
        if self.subset_size < 1:
            raise ConfigurationError(f"subset_size must be >= 1, got {self.subset_size}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigurationError(f"crossover_rate must lie in [0, 1], got {self.crossover_rate}")
        # 0 generations is allowed: initial population only
        if self.max_generations < 0:
            raise ConfigurationError(f"max_generations must be >= 0, got {self.max_generations}")
        if self.fitness_batch_size < 1:
            raise ConfigurationError(
                f"fitness_batch_size must be >= 1, got {self.fitness_batch_size}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> GaConfig:
        if not isinstance(data, dict):
            raise ConfigurationError("GA config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> GaConfig:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mutation_strategy"] = self.mutation_strategy.value
        d["adaptive_partner_mode"] = self.adaptive_partner_mode.value
        return d

    def replace(self, **changes) -> GaConfig:
        return replace(self, **changes)


@dataclass(eq=False)
class Chromosome:
    mask: np.ndarray
    fitness: float | None = None

    def __post_init__(self):
        mask = np.array(self.mask)
        if mask.ndim != 1 or not np.isin(mask, (0, 1)).all():
            raise ConfigurationError(f"mask must be a 0/1 vector, got {self.mask!r}")
        self.mask = mask.astype(bool)

    @classmethod
    def _trusted(cls, mask: np.ndarray, fitness: float | None = None) -> Chromosome:
        # skips validation; mask must already be a 1-D bool array
        obj = cls.__new__(cls)
        obj.mask = mask
        obj.fitness = fitness
        return obj

    @classmethod
    def from_positions(cls, positions, n_tx: int) -> Chromosome:
        mask = np.zeros(n_tx, dtype=bool)
        mask[list(positions)] = True
        return cls(mask)

    @classmethod
    def from_string(cls, bits: str) -> Chromosome:
        """``Chromosome.from_string("0110")``; handy in tests and logs."""
        return cls([int(b) for b in bits])

    @property
    def n_tx(self) -> int:
        return self.mask.size

    @property
    def popcount(self) -> int:
        return int(self.mask.sum())

    @property
    def subset(self) -> AntennaSubset:
        return AntennaSubset.from_mask(self.mask)

    @property
    def key(self) -> bytes:
        return self.mask.tobytes()

    def copy(self) -> Chromosome:
        return Chromosome._trusted(self.mask.copy(), self.fitness)

    def __str__(self):
        return "".join("1" if b else "0" for b in self.mask)

    def __repr__(self):
        return f"Chromosome({self}, fitness={self.fitness})"


@dataclass(frozen=True)
class MutationPointSet:
    feasible_points: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.feasible_points)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_subset: AntennaSubset
    evaluations: int


@dataclass
class RunTrace:
    per_generation: list[GenerationStats] = field(default_factory=list)
    evaluations: int = 0
    cache_hits: int = 0
    initial_best_fitness: float = float("nan")
    initial_mean_fitness: float = float("nan")
    initial_evaluations: int = 0

    @property
    def best_fitness(self) -> list[float]:
        return [s.best_fitness for s in self.per_generation]

    @property
    def final_fitness(self) -> float:
        if self.per_generation:
            return self.per_generation[-1].best_fitness
        return self.initial_best_fitness

    def generations_to_within(self, rel_tol: float) -> int:
        """Generations run before best fitness first gets within ``rel_tol`` of its final value.

        0 means the initial population already qualified.
        """
        target = self.final_fitness * (1.0 - rel_tol)
        if self.initial_best_fitness >= target:
            return 0
        for s in self.per_generation:
            if s.best_fitness >= target:
                return s.generation
        return len(self.per_generation)

    def to_csv(self, fh=None) -> str | None:
        """Write ``generation,best_fitness,mean_fitness,best_subset`` rows."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["generation", "best_fitness", "mean_fitness", "best_subset"])
        for s in self.per_generation:
            w.writerow([s.generation, f"{s.best_fitness:.6f}", f"{s.mean_fitness:.6f}",
                        str(s.best_subset)])
        return out.getvalue() if fh is None else None


def evaluate_fitness(chromosome: Chromosome, batch: RealizationBatch, snr: Snr) -> float:
    if chromosome.n_tx != batch.n_tx:
        raise DimensionError(
            f"chromosome has {chromosome.n_tx} genes but the batch has {batch.n_tx} antennas"
        )
    chromosome.fitness = ergodic_capacity(batch, chromosome.subset, snr).bits_per_s_per_hz
    return chromosome.fitness


class FitnessEvaluator:
    """Memoized :func:`evaluate_fitness` over one shared batch.

    ``evaluations`` counts every request; ``cache_hits`` counts the ones
    answered from the memo.
    """

    def __init__(self, batch: RealizationBatch, snr: Snr, subset_size: int | None = None):
        self.batch = batch
        self.snr = snr
        self.subset_size = subset_size
        self.evaluations = 0
        self.cache_hits = 0
        self._cache: dict[bytes, float] = {}

    def __call__(self, chromosome: Chromosome) -> float:
        if self.subset_size is not None and chromosome.popcount != self.subset_size:
            raise RuntimeError(
                f"cardinality violated: {chromosome} has {chromosome.popcount} ones, "
                f"expected {self.subset_size}"
            )
        self.evaluations += 1
        key = chromosome.key
        if key in self._cache:
            self.cache_hits += 1
            chromosome.fitness = self._cache[key]
        else:
            self._cache[key] = evaluate_fitness(chromosome, self.batch, self.snr)
        return chromosome.fitness


def _check_subset_size(n_t, n_tx):
    if not 1 <= n_t <= n_tx:
        raise ConfigurationError(f"subset size {n_t} must lie in [1, {n_tx}]")


def init_population(config: GaConfig, n_tx: int, rng: np.random.Generator) -> list[Chromosome]:
    _check_subset_size(config.subset_size, n_tx)
    return [
        Chromosome.from_positions(rng.choice(n_tx, size=config.subset_size, replace=False), n_tx)
        for _ in range(config.population_size)
    ]


def cut_point(config: GaConfig, n_tx: int, rng: np.random.Generator) -> int | None:
    """Draw the crossover decision: a cut in ``[1, n_tx - 1]`` or None for no crossover."""
    crossed = rng.random() < config.crossover_rate
    if not crossed or n_tx < 2:
        return None
    return int(rng.integers(1, n_tx))


def repair_cardinality(chromosome: Chromosome, n_t: int, rng: np.random.Generator) -> Chromosome:
    _check_subset_size(n_t, chromosome.n_tx)
    mask = chromosome.mask.copy()
    ones = np.flatnonzero(mask)
    if len(ones) == n_t:
        return Chromosome(mask, chromosome.fitness)
    if len(ones) > n_t:
        mask[rng.choice(ones, size=len(ones) - n_t, replace=False)] = False
    else:
        zeros = np.flatnonzero(~mask)
        mask[rng.choice(zeros, size=n_t - len(ones), replace=False)] = True
    return Chromosome(mask)


def crossover(
    parent_a: Chromosome, parent_b: Chromosome, config: GaConfig, rng: np.random.Generator
) -> tuple[Chromosome, Chromosome]:
    if parent_a.n_tx != parent_b.n_tx:
        raise DimensionError(f"parents differ in length: {parent_a.n_tx} vs {parent_b.n_tx}")
    cut = cut_point(config, parent_a.n_tx, rng)
    a, b = parent_a.mask, parent_b.mask
    if cut is None:
        raw_a, raw_b = a.copy(), b.copy()
    else:
        raw_a = np.concatenate([a[:cut], b[cut:]])
        raw_b = np.concatenate([b[:cut], a[cut:]])
    return (
        repair_cardinality(Chromosome(raw_a), config.subset_size, rng),
        repair_cardinality(Chromosome(raw_b), config.subset_size, rng),
    )


def feasible_points(chromosome: Chromosome) -> MutationPointSet:
    return MutationPointSet(tuple(int(p) for p in np.flatnonzero(chromosome.mask)))


def _swap(mask, one, zero):
    out = mask.copy()
    out[one] = False
    out[zero] = True
    return Chromosome._trusted(out)


def plain_mutation(chromosome: Chromosome, config: GaConfig, rng: np.random.Generator) -> Chromosome:
    ones = np.flatnonzero(chromosome.mask)
    zeros = np.flatnonzero(~chromosome.mask)
    if len(zeros) == 0 or len(ones) == 0:
        return chromosome.copy()
    one = rng.choice(ones)
    zero = rng.choice(zeros)
    return _swap(chromosome.mask, one, zero)


def adaptive_mutation(
    chromosome: Chromosome,
    batch: RealizationBatch,
    snr: Snr,
    config: GaConfig,
    rng: np.random.Generator,
    evaluate: Callable[[Chromosome], float] | None = None,
) -> Chromosome:
    """Score a move at every feasible point and keep the best result.

    ``best_swap`` pairs each active antenna with every inactive one;
    ``random_zero`` pairs it with a single random inactive antenna. The
    child itself is returned when it beats every candidate. Ties go to the
    lowest feasible point, then the lowest partner index.
    """
    if evaluate is None:
        def evaluate(c):
            return evaluate_fitness(c, batch, snr)

    if chromosome.fitness is None:
        evaluate(chromosome)
    zeros = np.flatnonzero(~chromosome.mask)
    if len(zeros) == 0:
        return chromosome.copy()

    best = None
    for f in feasible_points(chromosome).feasible_points:
        if config.adaptive_partner_mode is PartnerMode.BEST_SWAP:
            partners = zeros
        else:
            partners = (rng.choice(zeros),)
        for z in partners:
            cand = _swap(chromosome.mask, f, z)
            evaluate(cand)
            if best is None or cand.fitness > best.fitness:
                best = cand
    if chromosome.fitness > best.fitness:
        return chromosome.copy()
    return best


def select_next_generation(
    parents: list[Chromosome], children: list[Chromosome], config: GaConfig
) -> list[Chromosome]:
    pool = [(c, 0, i) for i, c in enumerate(parents)] + [(c, 1, i) for i, c in enumerate(children)]
    for c, _, _ in pool:
        if c.fitness is None:
            raise RuntimeError(f"unevaluated chromosome {c} in selection pool")
    pool.sort(key=lambda t: (-t[0].fitness, t[1], t[2]))
    return [c for c, _, _ in pool[: config.population_size]]


def _stats(generation, population, evaluations):
    fits = [c.fitness for c in population]
    return GenerationStats(
        generation=generation,
        best_fitness=population[0].fitness,
        mean_fitness=float(np.mean(fits)),
        best_subset=population[0].subset,
        evaluations=evaluations,
    )


def run(
    channel_cfg: ChannelConfig,
    ga_cfg: GaConfig,
    snr: Snr,
    batch: RealizationBatch | None = None,
) -> tuple[Chromosome, RunTrace]:
    """Run the GA and return the best chromosome seen plus its trace.

    Without ``batch`` a fitness batch of ``ga_cfg.fitness_batch_size``
    realizations is drawn with ``channel_cfg.seed``. All chromosomes of the
    run are scored against that one batch.
    """
    n_tx = channel_cfg.n_tx
    _check_subset_size(ga_cfg.subset_size, n_tx)
    if batch is None:
        batch = generate_batch(channel_cfg, ga_cfg.fitness_batch_size, channel_cfg.seed)
    elif batch.n_tx != n_tx:
        raise DimensionError(f"batch has {batch.n_tx} antennas, config says {n_tx}")

    rng = np.random.default_rng(ga_cfg.seed)
    evaluate = FitnessEvaluator(batch, snr, ga_cfg.subset_size)

    population = init_population(ga_cfg, n_tx, rng)
    for c in population:
        evaluate(c)
    population = select_next_generation(population, [], ga_cfg)
    init = _stats(0, population, evaluate.evaluations)
    trace = RunTrace(
        initial_best_fitness=init.best_fitness,
        initial_mean_fitness=init.mean_fitness,
        initial_evaluations=init.evaluations,
    )
    best = population[0].copy()

    n = ga_cfg.population_size
    for generation in range(1, ga_cfg.max_generations + 1):
        order = rng.permutation(n)
        children = []
        for i in range(0, n, 2):
            children.extend(
                crossover(population[order[i]], population[order[i + 1]], ga_cfg, rng)
            )
        for k, child in enumerate(children):
            if ga_cfg.mutation_strategy is MutationStrategy.PLAIN:
                child = plain_mutation(child, ga_cfg, rng)
                evaluate(child)
            else:
                evaluate(child)
                child = adaptive_mutation(child, batch, snr, ga_cfg, rng, evaluate=evaluate)
            children[k] = child
        population = select_next_generation(population, children, ga_cfg)
        if population[0].fitness > best.fitness:
            best = population[0].copy()
        trace.per_generation.append(_stats(generation, population, evaluate.evaluations))

    trace.evaluations = evaluate.evaluations
    trace.cache_hits = evaluate.cache_hits
    return best, trace
