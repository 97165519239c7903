"""Command-line entry point: scalolab <mode> --config path [--seed N] [--out dir].

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 precondition hard-fail (only when the config opts into enforcement).
"""

import argparse
import sys

from .config import ConfigError, load_config, parse_config
from .errors import (
    NonIntegrabilityError,
    PreconditionError,
    QuadratureError,
    ResolutionError,
)
from .harness import run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scalolab",
        description="Wavelet scalogram toolkit for nonlinear long-memory series",
    )
    parser.add_argument("mode", choices=["simulate", "analyze", "estimate", "test", "mc-experiment", "nu-c"])
    parser.add_argument("--config", required=True, help="path to a JSON configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        if cfg.mode != args.mode or overrides:
            raw = dict(cfg.raw)
            raw["mode"] = args.mode
            raw.update(overrides)
            cfg = parse_config(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        paths = run(cfg)
    except PreconditionError as exc:
        print(f"precondition hard-fail: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, ResolutionError, NonIntegrabilityError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
