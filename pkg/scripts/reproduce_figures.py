#!/usr/bin/env python3
"""Run the full figure pipeline with the experimental defaults.

Writes per-kick CCD panels, moment series with fits, and the resonance scan
into the output directory (default ./out_figures).
"""

import argparse

from ratchet_lab.config import parse_config
from ratchet_lab.experiments import run_figs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out_figures")
    parser.add_argument("--engine", default="both", choices=("quantum", "optical", "both"))
    args = parser.parse_args()
    cfg = parse_config("hbar=0.5pi\n", {"engine": args.engine})
    run_figs(cfg, args.out)
    print(f"figure artifacts written to {args.out}/")


if __name__ == "__main__":
    main()
