#!/usr/bin/env python3
"""Run the full pipeline on the benchmark domains into out/run.

Spectra, gap report and cut-off on the unit square; squeeze sweep on
the unit square; manifold charts and convergence on the compressed
square; attractor simulation and squeeze comparison on the step domain.
Figures can then be rendered from the CSVs with the frontend:

    node frontend/dist/cli.js render --kind gap-ladder \
        --input out/run/gap/gap.csv --output out/run/gap/ladder.svg
"""

import sys
from pathlib import Path

from thinlab.cli import main

HERE = Path(__file__).resolve().parent
DOMAINS = HERE / "domains"
OUT = HERE.parent / "out" / "run"


def run(cmd, domain, out, *extra):
    args = [cmd, "--domain", str(DOMAINS / domain), "--out", str(OUT / out),
            "--seed", "1", *extra]
    print("thinlab", " ".join(args))
    rc = main(args)
    if rc != 0:
        sys.exit(rc)


if __name__ == "__main__":
    run("spectrum", "unit_square.json", "spectrum", "--mesh", str(1 / 512))
    run("gap", "unit_square.json", "gap", "--mesh", str(1 / 512))
    run("squeeze", "unit_square.json", "squeeze", "--mesh", str(1 / 64))
    run("cutoff", "small_square.json", "cutoff", "--mesh", str(0.15 / 48))
    run("manifold", "small_square.json", "manifold", "--mesh", str(0.15 / 32))
    run("simulate", "small_square.json", "simulate", "--mesh", str(0.15 / 32))
    run("compare", "step.json", "compare", "--mesh", str(1 / 16))
    print("all artifacts in", OUT)
