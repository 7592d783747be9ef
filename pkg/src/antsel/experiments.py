"""Experiment specs and the runners behind the ``antsel`` subcommands.

Seed policy: replicate ``r`` uses ``base_seed + r`` both for its channel
batch and for the GA, and that one batch is shared by every strategy, every
grid cell and the oracle of replicate ``r``. Primary outputs are pure
functions of the spec; wall-clock data goes to ``metadata.json`` only.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .capacity import Snr
from .channel import ChannelConfig, generate_batch
from .errors import BudgetError, ConfigurationError
from .ga import GaConfig, MutationStrategy, run
from .oracle import DEFAULT_BUDGET, exhaustive_search

CONVERGENCE_REL_TOL = 0.01


class SpecError(ConfigurationError):
    """An experiment spec file could not be read or failed validation."""


@dataclass(frozen=True)
class ExperimentSpec:
    channel: ChannelConfig
    ga: GaConfig
    snr_grid: tuple[float, ...]
    nt_grid: tuple[int, ...]
    repetitions: int = 1
    output_dir: str = "results"
    base_seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        object.__setattr__(self, "nt_grid", tuple(self.nt_grid))
        if not self.snr_grid:
            raise ConfigurationError("snr_grid must not be empty")
        if not self.nt_grid:
            raise ConfigurationError("nt_grid must not be empty")
        for i, s in enumerate(self.snr_grid):
            if not math.isfinite(s):
                raise ConfigurationError(f"snr_grid[{i}]={s} is not finite")
        for i, nt in enumerate(self.nt_grid):
            if isinstance(nt, bool) or not isinstance(nt, int):
                raise ConfigurationError(f"nt_grid[{i}]={nt!r} is not an integer")
            if not 1 <= nt <= self.channel.n_tx:
                raise ConfigurationError(
                    f"nt_grid[{i}]={nt} is infeasible for n_tx={self.channel.n_tx}"
                )
        if isinstance(self.repetitions, bool) or not isinstance(self.repetitions, int) \
                or self.repetitions < 1:
            raise ConfigurationError(f"repetitions must be an integer >= 1, got {self.repetitions!r}")
        if self.base_seed is None:
            object.__setattr__(self, "base_seed", self.channel.seed)
        if not 0 <= self.base_seed < 2**64 - self.repetitions:
            raise ConfigurationError(f"base_seed out of range: {self.base_seed}")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        if not isinstance(data, dict):
            raise ConfigurationError("spec must be a JSON object")
        known = {"channel", "ga", "snr_grid", "nt_grid", "repetitions", "output_dir",
                 "base_seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown spec keys: {sorted(unknown)}")
        for key in ("channel", "snr_grid", "nt_grid"):
            if key not in data:
                raise ConfigurationError(f"missing spec key: {key}")
        return cls(
            channel=ChannelConfig.from_dict(data["channel"]),
            ga=GaConfig.from_dict(data.get("ga", {})),
            snr_grid=_as_list(data["snr_grid"], "snr_grid"),
            nt_grid=_as_list(data["nt_grid"], "nt_grid"),
            repetitions=data.get("repetitions", 1),
            output_dir=data.get("output_dir", "results"),
            base_seed=data.get("base_seed"),
        )

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.to_dict(),
            "ga": self.ga.to_dict(),
            "snr_grid": list(self.snr_grid),
            "nt_grid": list(self.nt_grid),
            "repetitions": self.repetitions,
            "output_dir": self.output_dir,
            "base_seed": self.base_seed,
        }

    def seed(self, repetition: int) -> int:
        return self.base_seed + repetition

    def cells(self):
        """Grid cells in output order: n_t outer, SNR inner."""
        return [(nt, snr) for nt in self.nt_grid for snr in self.snr_grid]

    def with_base_seed(self, base_seed: int) -> ExperimentSpec:
        return ExperimentSpec(self.channel, self.ga, self.snr_grid, self.nt_grid,
                              self.repetitions, self.output_dir, base_seed)


def _as_list(value, name):
    if not isinstance(value, list):
        raise ConfigurationError(f"{name} must be a JSON list")
    return value


def _line_of(text: str, message: str) -> int:
    """Best-effort line number for a validation message: the first line quoting a key it names."""
    lines = text.splitlines()
    candidates = []
    for i, line in enumerate(lines, 1):
        for token in line.split('"')[1::2]:
            if token and token in message:
                candidates.append((-len(token), i))
    return min(candidates)[1] if candidates else 1


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"{path}:1: cannot read spec: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    try:
        return ExperimentSpec.from_dict(data)
    except (ConfigurationError, TypeError) as exc:
        raise SpecError(f"{path}:{_line_of(text, str(exc))}: {exc}") from exc


def cell_name(n_t: int, snr_db: float) -> str:
    return f"nt{n_t}_snr{snr_db:g}"


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6f}"


def _csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


# --- per-task workers (top level so they pickle for --jobs) -----------------


def _batch(spec: ExperimentSpec, repetition: int):
    return generate_batch(spec.channel, spec.ga.fitness_batch_size, spec.seed(repetition))


def run_replicate(spec: ExperimentSpec, n_t: int, snr_db: float, repetition: int,
                  strategy: MutationStrategy | str | None = None, batch=None):
    """One GA run for a grid cell and replicate, on that replicate's shared batch."""
    ga = spec.ga.replace(subset_size=n_t, seed=spec.seed(repetition))
    if strategy is not None:
        ga = ga.replace(mutation_strategy=MutationStrategy(strategy))
    if batch is None:
        batch = _batch(spec, repetition)
    return run(spec.channel, ga, Snr(snr_db), batch=batch)


def _oracle_or_none(batch, n_t, snr_db, budget, keep_ranked=False):
    if math.comb(batch.n_tx, n_t) > budget:
        return None
    return exhaustive_search(batch, n_t, Snr(snr_db), budget=budget, keep_ranked=keep_ranked)


def _run_task(spec, n_t, snr_db, r):
    best, trace = run_replicate(spec, n_t, snr_db, r)
    return {
        "n_t": n_t,
        "snr_db": snr_db,
        "repetition": r,
        "seed": spec.seed(r),
        "strategy": spec.ga.mutation_strategy.value,
        "best_subset": list(best.subset.positions),
        "capacity": best.fitness,
        "evaluations": trace.evaluations,
        "cache_hits": trace.cache_hits,
        "trace_csv": trace.to_csv(),
    }


def _paired_task(spec, n_t, snr_db, r, oracle_budget):
    batch = _batch(spec, r)
    out = {"n_t": n_t, "snr_db": snr_db, "repetition": r, "seed": spec.seed(r)}
    for strategy in (MutationStrategy.ADAPTIVE, MutationStrategy.PLAIN):
        best, trace = run_replicate(spec, n_t, snr_db, r, strategy, batch=batch)
        out[strategy.value] = {
            "best_subset": list(best.subset.positions),
            "capacity": best.fitness,
            "generations_to_final": trace.generations_to_within(CONVERGENCE_REL_TOL),
            "trace": [
                (s.generation, s.evaluations, s.best_fitness, s.mean_fitness, str(s.best_subset))
                for s in trace.per_generation
            ],
            "evaluations": trace.evaluations,
        }
    oracle = _oracle_or_none(batch, n_t, snr_db, oracle_budget)
    out["oracle"] = None if oracle is None else {
        "best_subset": list(oracle.best_subset.positions),
        "capacity": oracle.best_capacity,
    }
    return out


def _oracle_task(spec, n_t, snr_db, r, budget, keep_ranked):
    batch = _batch(spec, r)
    res = exhaustive_search(batch, n_t, Snr(snr_db), budget=budget, keep_ranked=keep_ranked)
    return {
        "n_t": n_t,
        "snr_db": snr_db,
        "repetition": r,
        "seed": spec.seed(r),
        "json": res.to_json(),
        "ranked_csv": res.ranked_csv() if keep_ranked else None,
        "best_subset": list(res.best_subset.positions),
        "best_capacity": res.best_capacity,
        "subsets_evaluated": res.subsets_evaluated,
    }


def _map(fn, arg_list, jobs):
    if jobs <= 1:
        return [fn(*a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *a) for a in arg_list]
        return [f.result() for f in futures]


# --- output helpers ---------------------------------------------------------


@dataclass
class OutputDir:
    root: Path
    written: list[Path] = field(default_factory=list)

    def write(self, rel: str, text: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.written.append(path)
        return path

    def begin(self, spec: ExperimentSpec, command: str):
        self.root.mkdir(parents=True, exist_ok=True)
        self.write("spec.json", json.dumps(spec.to_dict(), indent=2) + "\n")
        meta = {
            "command": command,
            "version": __version__,
            "started_utc": datetime.now(timezone.utc).isoformat(),
        }
        (self.root / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")


def _tasks(spec):
    return [(nt, snr, r) for nt, snr in spec.cells() for r in range(spec.repetitions)]


# --- commands ---------------------------------------------------------------


def cmd_run(spec: ExperimentSpec, out_dir, jobs: int = 1) -> dict:
    out = OutputDir(Path(out_dir))
    out.begin(spec, "run")
    results = _map(_run_task, [(spec, nt, snr, r) for nt, snr, r in _tasks(spec)], jobs)

    run_rows = []
    by_cell: dict[tuple, list[float]] = {}
    for res in results:
        cell = cell_name(res["n_t"], res["snr_db"])
        trace_rel = f"traces/{cell}/{res['repetition']}.csv"
        out.write(trace_rel, res.pop("trace_csv"))
        record = dict(res, trace=trace_rel)
        out.write(f"runs/{cell}/{res['repetition']}.json", json.dumps(record, indent=2) + "\n")
        run_rows.append([res["n_t"], f"{res['snr_db']:g}", res["repetition"], res["seed"],
                         ";".join(map(str, res["best_subset"])), _fmt(res["capacity"])])
        by_cell.setdefault((res["n_t"], res["snr_db"]), []).append(res["capacity"])

    agg_rows = []
    for (nt, snr), caps in by_cell.items():
        agg_rows.append([nt, f"{snr:g}", len(caps), _fmt(statistics.fmean(caps)),
                         _fmt(statistics.pstdev(caps)), _fmt(min(caps)), _fmt(max(caps))])
    out.write("runs.csv", _csv(
        ["n_t", "snr_db", "repetition", "seed", "best_subset", "capacity"], run_rows))
    out.write("aggregate.csv", _csv(
        ["n_t", "snr_db", "repetitions", "mean_capacity", "std_capacity", "min_capacity",
         "max_capacity"], agg_rows))
    return {"results": results, "mean": {k: statistics.fmean(v) for k, v in by_cell.items()}}


def cmd_sweep_snr(spec: ExperimentSpec, out_dir, jobs: int = 1) -> dict:
    out = OutputDir(Path(out_dir))
    out.begin(spec, "sweep-snr")
    results = _map(_run_task, [(spec, nt, snr, r) for nt, snr, r in _tasks(spec)], jobs)
    rows, by_cell = [], {}
    for res in results:
        rows.append([res["n_t"], f"{res['snr_db']:g}", res["repetition"],
                     ";".join(map(str, res["best_subset"])), _fmt(res["capacity"])])
        by_cell.setdefault((res["n_t"], res["snr_db"]), []).append(res["capacity"])
    summary = [[nt, f"{snr:g}", _fmt(statistics.fmean(c)), _fmt(statistics.pstdev(c)), len(c)]
               for (nt, snr), c in by_cell.items()]
    out.write("sweep_runs.csv", _csv(
        ["n_t", "snr_db", "repetition", "best_subset", "capacity"], rows))
    out.write("sweep.csv", _csv(
        ["n_t", "snr_db", "mean_capacity", "std_capacity", "repetitions"], summary))
    return {"results": results, "mean": {k: statistics.fmean(v) for k, v in by_cell.items()}}


def _paired(spec, oracle_budget, jobs):
    return _map(_paired_task,
                [(spec, nt, snr, r, oracle_budget) for nt, snr, r in _tasks(spec)], jobs)


def cmd_convergence(spec: ExperimentSpec, out_dir, jobs: int = 1,
                    oracle_budget: int = DEFAULT_BUDGET) -> dict:
    out = OutputDir(Path(out_dir))
    out.begin(spec, "convergence")
    results = _paired(spec, oracle_budget, jobs)

    trace_rows, summary_rows = [], []
    for res in results:
        key = [res["n_t"], f"{res['snr_db']:g}", res["repetition"]]
        for strategy in ("adaptive", "plain"):
            for gen, evals, best, mean, subset in res[strategy]["trace"]:
                trace_rows.append([strategy] + key + [gen, evals, _fmt(best), _fmt(mean), subset])
        oracle_cap = res["oracle"]["capacity"] if res["oracle"] else None
        summary_rows.append(key + [
            _fmt(res["adaptive"]["capacity"]), _fmt(res["plain"]["capacity"]),
            res["adaptive"]["generations_to_final"], res["plain"]["generations_to_final"],
            _fmt(oracle_cap),
        ])
    out.write("convergence.csv", _csv(
        ["strategy", "n_t", "snr_db", "repetition", "generation", "evaluations",
         "best_fitness", "mean_fitness", "best_subset"], trace_rows))
    out.write("convergence_summary.csv", _csv(
        ["n_t", "snr_db", "repetition", "adaptive_final", "plain_final",
         "adaptive_generations", "plain_generations", "oracle_capacity"], summary_rows))

    lines = []
    for nt, snr in spec.cells():
        cell = [r for r in results if r["n_t"] == nt and r["snr_db"] == snr]
        ga = [r["adaptive"]["generations_to_final"] for r in cell]
        gp = [r["plain"]["generations_to_final"] for r in cell]
        fa = statistics.fmean(r["adaptive"]["capacity"] for r in cell)
        fp = statistics.fmean(r["plain"]["capacity"] for r in cell)
        lines.append(
            f"{cell_name(nt, snr)}: adaptive reaches within {CONVERGENCE_REL_TOL:.0%} of its final "
            f"value in median {statistics.median(ga):g} generations vs plain "
            f"{statistics.median(gp):g}; mean final {fa:.6f} vs {fp:.6f}"
        )
    return {"results": results, "summary": lines}


def comparison_rows(results) -> list[list]:
    rows = []
    for res in results:
        a, p, o = res["adaptive"], res["plain"], res["oracle"]
        oc = o["capacity"] if o else None
        rows.append([
            res["n_t"], f"{res['snr_db']:g}", res["repetition"],
            ";".join(map(str, a["best_subset"])), ";".join(map(str, p["best_subset"])),
            _fmt(a["capacity"]), _fmt(p["capacity"]), _fmt(oc),
            _fmt(None if oc is None else oc - a["capacity"]),
            _fmt(None if oc is None else oc - p["capacity"]),
        ])
    return rows


def cmd_compare(spec: ExperimentSpec, out_dir, jobs: int = 1,
                oracle_budget: int = DEFAULT_BUDGET) -> dict:
    out = OutputDir(Path(out_dir))
    out.begin(spec, "compare")
    results = _paired(spec, oracle_budget, jobs)
    out.write("compare.csv", _csv(
        ["n_t", "snr_db", "repetition", "selected_adaptive", "selected_plain",
         "capacity_adaptive", "capacity_plain", "oracle_capacity", "gap_adaptive", "gap_plain"],
        comparison_rows(results)))

    summary = []
    for nt, snr in spec.cells():
        cell = [r for r in results if r["n_t"] == nt and r["snr_db"] == snr]
        ca = [r["adaptive"]["capacity"] for r in cell]
        cp = [r["plain"]["capacity"] for r in cell]
        if all(r["oracle"] for r in cell):
            oc = [r["oracle"]["capacity"] for r in cell]
            extra = [_fmt(statistics.fmean(oc)),
                     _fmt(statistics.median(o - a for o, a in zip(oc, ca))),
                     _fmt(statistics.median(o - p for o, p in zip(oc, cp)))]
        else:
            extra = ["", "", ""]
        summary.append([nt, f"{snr:g}", len(cell), _fmt(statistics.fmean(ca)),
                        _fmt(statistics.fmean(cp)),
                        _fmt(statistics.fmean(a - p for a, p in zip(ca, cp)))] + extra)
    out.write("compare_summary.csv", _csv(
        ["n_t", "snr_db", "repetitions", "mean_adaptive", "mean_plain", "mean_gap",
         "mean_oracle", "median_oracle_gap_adaptive", "median_oracle_gap_plain"], summary))
    return {"results": results}


def cmd_oracle(spec: ExperimentSpec, out_dir, jobs: int = 1,
               oracle_budget: int = DEFAULT_BUDGET, ranked: bool = False) -> dict:
    # refuse before writing anything
    for nt in spec.nt_grid:
        n = math.comb(spec.channel.n_tx, nt)
        if n > oracle_budget:
            raise BudgetError(n, oracle_budget)
    out = OutputDir(Path(out_dir))
    out.begin(spec, "oracle")
    results = _map(_oracle_task, [(spec, nt, snr, r, oracle_budget, ranked)
                                  for nt, snr, r in _tasks(spec)], jobs)
    rows = []
    for res in results:
        cell = cell_name(res["n_t"], res["snr_db"])
        out.write(f"oracle/{cell}/{res['repetition']}.json", res["json"])
        if res["ranked_csv"] is not None:
            out.write(f"oracle/{cell}/{res['repetition']}_ranked.csv", res["ranked_csv"])
        rows.append([res["n_t"], f"{res['snr_db']:g}", res["repetition"], res["seed"],
                     ";".join(map(str, res["best_subset"])), _fmt(res["best_capacity"]),
                     res["subsets_evaluated"]])
    out.write("oracle.csv", _csv(
        ["n_t", "snr_db", "repetition", "seed", "best_subset", "best_capacity",
         "subsets_evaluated"], rows))
    return {"results": results}

