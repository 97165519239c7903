#!/usr/bin/env python3
"""Reproduce the scalogram slope law 2(K + delta(q0)) by Monte Carlo.

Writes an aggregate CSV per configuration under --out.
"""

import argparse
import json
import os

from scalolab.config import parse_config
from scalolab.harness import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/slope")
    ap.add_argument("--n", type=int, default=2**15)
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=900)
    args = ap.parse_args()

    configs = (
        ("hermite:1", 0.3, 0),
        ("hermite:1", 0.35, 1),
        ("hermite:2", 0.42, 0),
    )
    for g, d, K in configs:
        sub = os.path.join(args.out, f"{g.replace(':', '')}_d{d}_K{K}")
        cfg = parse_config({
            "mode": "mc-experiment",
            "model": {"d": d, "K": K},
            "g": g,
            "bank": {"family": "db2", "jmax": 10},
            "n": args.n, "j": 4, "p": 4,
            "replicates": args.reps, "seed": args.seed,
            "preset": "slope",
            "out": sub,
        })
        paths = run(cfg)
        row = json.load(open(paths[1]))["results"][0]
        print(f"{g} d={d} K={K}: slope {row['slope']:.4f} "
              f"(target {2 * row['d0_true']:.4f}), files: {paths[0]}")


if __name__ == "__main__":
    main()
