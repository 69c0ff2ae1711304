"""Command-line entry point.

    miptlab rmt|chain1d|grid2d|theory|trajectory|sweep \
        --config cfg.json [--seed N] [--out DIR] [--workers N]

Flags override config-file values. MIPTLAB_WORKERS provides the default
worker count. Exit codes: 0 success, 1 configuration error, 2 numerical
failure in at least one cell.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import MODES, ConfigError, ExperimentConfig, run


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="miptlab", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} experiment")
        p.add_argument("--config", help="JSON config file (all keys optional)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--workers", type=int, help="worker-pool size override")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
            return 1
    data["mode"] = args.mode
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["out_dir"] = args.out
    if args.workers is not None:
        data["workers"] = args.workers
    elif "workers" not in data and os.environ.get("MIPTLAB_WORKERS"):
        data["workers"] = int(os.environ["MIPTLAB_WORKERS"])

    try:
        cfg = ExperimentConfig.from_dict(data)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    done = sum(c.get("realizations_done", 0) for c in manifest.cells)
    failed = sum(c.get("failed", 0) for c in manifest.cells)
    print(
        f"{cfg.mode}: {done} realizations done, {failed} failed, "
        f"{manifest.wall_time_s:.1f}s -> {cfg.out_dir}"
    )
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
