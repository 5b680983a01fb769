"""Command-line entry point.

Exit codes: 0 success, 1 failed validation, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config_file, parse_sweep
from .datasets import write_csv
from .distance import DegenerateRegionError
from .montecarlo import ConfigurationError
from .params import ParameterError

log = logging.getLogger("dualconn")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value parameter file")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, help="Monte Carlo sample count (>= 10000)")
    common.add_argument("--out", type=Path, help="output directory for CSV files")
    common.add_argument("--sweep", help="name=start:stop:steps over lambda_s_ratio, p_s_dbm or alpha")
    common.add_argument("--lambda-s-ratio", type=float, dest="lambda_s_ratio")
    common.add_argument("--lambda-s", type=float, dest="lambda_s", help="absolute SCell intensity per m^2")
    common.add_argument("--ps-dbm", type=float, dest="p_s_dbm")
    common.add_argument("--alpha", type=float)
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dualconn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("probabilities", parents=[common], help="case probabilities (fig2, fig3)")
    sub.add_parser("distances", parents=[common], help="conditional distance laws (fig4)")
    sub.add_parser("capacity", parents=[common], help="spectral efficiency and baselines (fig5-fig7)")
    v = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    v.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                   help="override one check tolerance, e.g. simplex=1e-15")
    return p


def _tolerances(items):
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance must look like name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {name!r}: not a number: {value!r}") from None
    return out


def build_config(args) -> ExperimentConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in
                 ("seed", "samples", "out", "lambda_s_ratio", "lambda_s", "p_s_dbm", "alpha", "workers")}
    if args.sweep:
        overrides["sweep"] = parse_sweep(args.sweep)
    if getattr(args, "tolerance", None):
        overrides["tolerances"] = _tolerances(args.tolerance)
    if overrides.get("lambda_s_ratio") is not None:
        file_values.pop("lambda_s", None)
    return ExperimentConfig.build(file_values, overrides)


def _emit(datasets, out: Path):
    for ds in datasets:
        path = write_csv(ds, out / f"{ds.figure_id}.csv")
        print(f"wrote {path} ({ds.data.shape[0]} rows)")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    from . import figures

    try:
        config = build_config(args)
        if args.command == "probabilities":
            _emit(figures.cmd_probabilities(config), config.out)
        elif args.command == "distances":
            _emit([figures.cmd_distances(config)], config.out)
        elif args.command == "capacity":
            _emit(figures.cmd_capacity(config).values(), config.out)
        else:
            report = figures.cmd_validate(config)
            print(report.render())
            return report.exit_code
    except (ConfigError, ParameterError, ConfigurationError, DegenerateRegionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
