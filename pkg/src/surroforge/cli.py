"""Command-line interface.

Subcommands: gen-dataset, train-mea, run-experiment, report.
Exit codes: 0 success, 1 config or usage error, 2 runtime failure.
"""
import argparse
import logging
import sys
import time
from pathlib import Path

from .cache import Cache
from .config import ConfigError, load_config
from .experiment import run_experiment
from .provider import SAMPLER_IDS, DatasetProvider
from .report import render_figures, render_report

log = logging.getLogger("surroforge")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; here usage problems are validation errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--config", type=Path, default=None,
                        help="TOML config file (defaults are built in)")
    parser.add_argument("--seed", type=int, default=None,
                        help="replace the configured seed list with one seed")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel fit/score workers (default 1)")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (overrides the config)")
    parser.add_argument("--samples", type=int, default=None,
                        help="dataset size k (overrides the config)")


def build_parser():
    parser = _Parser(prog="surroforge",
                     description="surrogate models of simulated environments: "
                                 "datasets, training, and evaluation")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen-dataset", help="build one dataset and save it as CSV")
    _add_common(p)
    p.add_argument("--sampler", required=True, choices=sorted(SAMPLER_IDS),
                   help="dataset sampler to run")

    p = sub.add_parser("train-mea", help="train the max-entropy exploration policy")
    _add_common(p)

    p = sub.add_parser("run-experiment",
                       help="run the configured cross-validation experiment")
    _add_common(p)

    p = sub.add_parser("report",
                       help="render tables and figures from a results directory")
    _add_common(p)
    return parser


def _overrides(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.out is not None:
        overrides["out"] = str(args.out)
    return overrides


def cmd_gen_dataset(args):
    config = load_config(args.config, overrides=_overrides(args))
    provider = DatasetProvider(config.env, config.samples,
                               params=config.sampler_params(), cache=Cache())
    seed = config.seeds[0]
    t0 = time.monotonic()
    dataset = provider.dataset(args.sampler, seed)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{config.env}-{args.sampler}-k{len(dataset)}-s{seed}.csv"
    dataset.save(path)
    print(f"wrote {len(dataset)} transitions to {path} "
          f"({time.monotonic() - t0:.1f}s)")
    return 0


def cmd_train_mea(args):
    config = load_config(args.config, overrides=_overrides(args))
    provider = DatasetProvider(config.env, config.samples,
                               params=config.sampler_params(), cache=Cache())
    seed = config.seeds[0]
    t0 = time.monotonic()
    policy = provider.mea_policy(seed)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"mea-{config.env}-s{seed}.json"
    policy.save(path)
    print(f"trained max-entropy policy for {config.env}: "
          f"entropy {policy.entropy:.4f} nats -> {path} "
          f"({time.monotonic() - t0:.1f}s)")
    return 0


def cmd_run_experiment(args):
    config = load_config(args.config, overrides=_overrides(args))
    result = run_experiment(config, jobs=args.jobs)
    print(render_report(result.out_dir))
    print()
    for name in sorted(result.files):
        print(f"  {result.files[name]}")
    if result.failed:
        log.error("%d matrix cells failed", len(result.matrix.missing()))
        return 2
    return 0


def cmd_report(args):
    config = load_config(args.config, overrides=_overrides(args))
    results_dir = Path(config.out_dir)
    print(render_report(results_dir))
    paths = render_figures(results_dir)
    print()
    for path in paths:
        print(f"  {path}")
    return 0


_COMMANDS = {
    "gen-dataset": cmd_gen_dataset,
    "train-mea": cmd_train_mea,
    "run-experiment": cmd_run_experiment,
    "report": cmd_report,
}


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return 1
    except Exception:
        log.exception("command failed")
        return 2


if __name__ == "__main__":
    sys.exit(main())
