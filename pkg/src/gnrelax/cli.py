"""Command-line entry point.

    gnrelax <experiment> [--config FILE] [--output DIR] [--jobs N] [--seed S] [--override key=value ...]

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

import argparse
import logging
import sys

from . import experiments
from .config import EXPERIMENTS, config_from_dict, parse_config
from .errors import ConfigError, GNRelaxError
from .results import emit_results

log = logging.getLogger("gnrelax")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _subcommand(name):
    return name.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(prog="gnrelax", description="Relaxation vs Green-Naghdi experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*EXPERIMENTS, "run"):
        sp = sub.add_parser(
            _subcommand(name),
            help="run the experiment named in the config" if name == "run" else f"run the {name} experiment",
        )
        sp.add_argument("--config", help="YAML or JSON config file")
        sp.add_argument("--output", help="output directory (overrides output_dir)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--seed", type=int, default=0, help="reserved; all experiments are deterministic")
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="dotted-key override")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def load(args):
    overrides = list(args.override)
    if args.command != "run":
        overrides.insert(0, f"experiment={args.command.replace('-', '_')}")
    if args.output:
        overrides.append(f"output_dir={args.output}")
    if args.config:
        return parse_config(args.config, overrides)
    if args.command == "run":
        raise ConfigError("the 'run' subcommand needs --config")
    return config_from_dict({}, overrides)


def _summary(tables):
    for t in tables:
        print(f"{t.name}: {len(t.rows)} rows")
        for key, val in sorted(t.meta.items()):
            print(f"  {key} = {val}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tables = experiments.run_experiment(cfg, jobs=args.jobs, out_dir=cfg.output_dir)
    except GNRelaxError as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    emit_results(tables, cfg.output_dir, cfg)
    _summary(tables)
    print(f"results written to {cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
