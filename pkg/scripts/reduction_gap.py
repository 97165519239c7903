#!/usr/bin/env python3
"""Relative L2 gap between the scalogram of G(X) and that of its leading
Hermite term across scales, in the large-scale regime where the gap must
shrink (and, for comparison, the exploratory small-scale regime)."""

import argparse
import json
import os

from scalolab.config import parse_config
from scalolab.harness import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/reduction")
    ap.add_argument("--n", type=int, default=2**18)
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1110)
    ap.add_argument("--small-scale", action="store_true",
                    help="also run the exploratory small-scale regime")
    args = ap.parse_args()

    presets = ["large-scale"] + (["small-scale"] if args.small_scale else [])
    for preset in presets:
        cfg = parse_config({
            "mode": "mc-experiment",
            "model": {"d": 0.41, "K": 0},
            "g": {"kind": "hermite-coeffs", "coeffs": {"2": 2, "3": 1}},
            "bank": {"family": "db2", "jmax": 13},
            "n": args.n, "j": 10, "p": 1,
            "replicates": args.reps, "seed": args.seed,
            "preset": preset,
            "out": os.path.join(args.out, preset),
        })
        paths = run(cfg)
        row = json.load(open(paths[1]))["results"][0]
        gaps = {k: v for k, v in row.items() if k.startswith("rel_gap")}
        print(f"{preset} ({row['regime']}): {gaps}")


if __name__ == "__main__":
    main()
