"""Command line entry point: run experiment configs, describe experiments.

Exit codes: 0 success, 2 config error, 3 compute error, 4 I/O error.
The default output directory comes from --output, then the config's
output_dir, then $AHCVQE_OUTPUT, then ./ahcvqe_out.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import ConfigError, describe, load_config, run_experiment, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4

OUTPUT_ENV_VAR = "AHCVQE_OUTPUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ahcvqe",
                                     description="Alternating-Heisenberg-chain VQE experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute an experiment config")
    runp.add_argument("config", help="path to the JSON experiment config")
    runp.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    runp.add_argument("--output", default=None, help="output directory override")
    descp = sub.add_parser("describe", help="print an experiment recipe")
    descp.add_argument("experiment", help="experiment identifier")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "describe":
        try:
            print(describe(args.experiment))
        except ConfigError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except (ConfigError, FileNotFoundError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = (args.output or cfg.output_dir
               or os.environ.get(OUTPUT_ENV_VAR) or "ahcvqe_out")
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows, traces, timings = run_experiment(cfg, jobs=args.jobs)
    except Exception as err:  # noqa: BLE001 - map every compute failure to exit 3
        print(f"compute error: {err}", file=sys.stderr)
        return EXIT_COMPUTE

    try:
        write_outputs(out_dir, cfg, rows, traces, timings)
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(rows)} rows to {out_dir}/results.csv")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
