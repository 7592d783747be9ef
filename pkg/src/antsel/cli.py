"""``antsel`` command line.

Exit codes: 0 success, 2 spec/configuration error, 3 budget error,
4 numeric failure. ``ANTSEL_SEED`` overrides the spec's base seed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import experiments
from .errors import BudgetError, ConfigurationError, NumericError
from .oracle import DEFAULT_BUDGET

log = logging.getLogger("antsel")

EXIT_OK, EXIT_SPEC, EXIT_BUDGET, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = {
    "run": experiments.cmd_run,
    "sweep-snr": experiments.cmd_sweep_snr,
    "convergence": experiments.cmd_convergence,
    "compare": experiments.cmd_compare,
    "oracle": experiments.cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antsel",
        description="Transmit-antenna subset selection experiments (GA vs exhaustive oracle).",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="experiment spec (JSON)")
        p.add_argument("--out", help="output directory (default: spec output_dir)")
        p.add_argument("--oracle-budget", type=int, default=DEFAULT_BUDGET,
                       help="max C(n_tx, n_t) subsets the oracle may enumerate")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name == "oracle":
            p.add_argument("--ranked", action="store_true",
                           help="also write the full ranked subset list as CSV")
    return parser


def _env_seed():
    raw = os.environ.get("ANTSEL_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"ANTSEL_SEED must be an integer, got {raw!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        spec = experiments.load_spec(args.spec)
        seed = _env_seed()
        if seed is not None:
            spec = spec.with_base_seed(seed)
        out = Path(args.out or spec.output_dir)
        kwargs = {"jobs": max(1, args.jobs)}
        if args.command in ("convergence", "compare", "oracle"):
            kwargs["oracle_budget"] = args.oracle_budget
        if args.command == "oracle":
            kwargs["ranked"] = args.ranked
        result = COMMANDS[args.command](spec, out, **kwargs)
    except BudgetError as exc:
        print(f"antsel: budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConfigurationError as exc:
        print(f"antsel: spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NumericError as exc:
        print(f"antsel: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    for line in result.get("summary", []):
        print(line)
    log.info("wrote %s", out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
