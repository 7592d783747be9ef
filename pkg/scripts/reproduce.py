#!/usr/bin/env python3
"""Run every shipped experiment spec through the ``antsel`` CLI.

    python scripts/reproduce.py --out results --jobs 4
    python scripts/reproduce.py --only smoke

Each experiment lands in its own subdirectory of ``--out``.
"""

import argparse
import sys
import time
from pathlib import Path

from antsel import cli

SPECS = Path(__file__).resolve().parent / "specs"

# name -> (subcommand, spec file)
EXPERIMENTS = {
    "smoke": ("run", "smoke.json"),
    "capacity_vs_nt": ("run", "capacity_vs_nt.json"),
    "snr_sweep": ("sweep-snr", "snr_sweep.json"),
    "compare": ("compare", "compare.json"),
    "convergence": ("convergence", "convergence.json"),
    "oracle": ("oracle", "oracle_study.json"),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="root output directory")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes per experiment")
    parser.add_argument("--only", nargs="+", choices=sorted(EXPERIMENTS), metavar="NAME",
                        help=f"subset of experiments: {', '.join(EXPERIMENTS)}")
    args = parser.parse_args(argv)

    for name in args.only or EXPERIMENTS:
        command, spec_file = EXPERIMENTS[name]
        out = Path(args.out) / name
        t0 = time.perf_counter()
        code = cli.main([command, "--spec", str(SPECS / spec_file), "--out", str(out),
                         "--jobs", str(args.jobs)])
        print(f"{name:<15} {command:<12} exit={code} {time.perf_counter() - t0:6.1f}s -> {out}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
