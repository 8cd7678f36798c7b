"""Command-line entry point: ``stepe run | suite | report``."""

import argparse
import logging
import sys

from .config import RunConfig, parse_config
from .errors import ConfigError, DataError
from .report import report_dir
from .runner import run_suite

FIGS = ("conv", "dyn", "band")


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _load(args):
    cfg = parse_config(args.config) if args.config else RunConfig().validate()
    if getattr(args, "methods", None):
        cfg.run.methods = _csv_list(args.methods)
    if getattr(args, "seeds", None):
        try:
            cfg.run.seeds = [int(s) for s in _csv_list(args.seeds)]
        except ValueError:
            raise ConfigError(f"expected comma-separated integers, got {args.seeds!r}", "--seeds") from None
    if getattr(args, "out", None):
        cfg.run.out = args.out
    return cfg.validate()


def _run(args):
    cfg = _load(args)
    summary = run_suite(cfg)
    for row in summary["table1"]:
        print(f"{row['method']:<12} acc {row['acc_mean']:.2f} +/- {row['acc_std']:.2f}")
    print(f"results written to {cfg.run.out}")
    return 1 if summary["failures"] else 0


def _suite(args):
    cfg = _load(args)
    summary = run_suite(cfg)
    for path in report_dir(cfg.run.out, figs=FIGS, tables=True):
        print(f"wrote {path}")
    return 1 if summary["failures"] else 0


def _report(args):
    figs = _csv_list(args.figs) if args.figs else []
    unknown = sorted(set(figs) - set(FIGS))
    if unknown:
        raise ConfigError(f"unknown figure kinds {unknown}; expected {', '.join(FIGS)}", "--figs")
    for path in report_dir(args.in_dir, figs=figs, tables=args.tables, out_dir=args.out):
        print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="stepe", description="Stepwise-elimination noisy-label benchmark harness.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-cell progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train the configured (method, seed) cells and write logs")
    p.add_argument("--config", help="key = value config file (defaults apply when omitted)")
    p.add_argument("--out", help="output directory (overrides run.out)")
    p.add_argument("--methods", help="comma-separated methods (overrides run.methods)")
    p.add_argument("--seeds", help="comma-separated seeds (overrides run.seeds)")
    p.set_defaults(func=_run)

    p = sub.add_parser("suite", help="run every cell, then render all figures and tables")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (overrides run.out)")
    p.set_defaults(func=_suite)

    p = sub.add_parser("report", help="render figures/tables from an existing run directory")
    p.add_argument("--in", dest="in_dir", required=True, help="directory holding *_epochs.csv and summary.json")
    p.add_argument("--figs", default="", help="comma-separated subset of conv,dyn,band")
    p.add_argument("--tables", action="store_true", help="also write tables.md from summary.json")
    p.add_argument("--out", help="where to write outputs (default: the input directory)")
    p.set_defaults(func=_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
