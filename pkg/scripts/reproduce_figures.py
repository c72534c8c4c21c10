"""Write every bundled figure table to a directory, one CSV per figure id.

    python3 scripts/reproduce_figures.py out/ [--format json] [--only fig2 fig4]
"""

import argparse
import sys
from pathlib import Path

from qpt_sim.cli import FIGURES, main


def run(out: Path, fmt: str, only: list[str]) -> int:
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for fig in only or FIGURES:
        code = main(["figure", fig, "--format", fmt, "-o", str(out / f"{fig}.{fmt}")])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--format", default="csv", choices=["csv", "json"])
    ap.add_argument("--only", nargs="*", default=[], choices=FIGURES)
    args = ap.parse_args()
    sys.exit(run(args.out, args.format, args.only))
