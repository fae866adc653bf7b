"""Command-line entry point.

    shrinkvar simulate --scenario 1 --profile desk --seed 7 --out runs/s1
    shrinkvar canada --profile desk --out runs/canada
    shrinkvar report --in runs/s1
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .canada import DatasetError, load_canada, run_canada
from .config import ConfigError, RunConfig, build_config, load_config_file
from .report import (
    CANADA_COEFS,
    CANADA_ERROR_COLUMNS,
    CANADA_ERRORS,
    CANADA_FORECASTS,
    emit_report,
    write_csv,
    write_records,
)
from .study import RunFailure, run_scenario

log = logging.getLogger("shrinkvar")

EXIT_CONFIG, EXIT_DATA, EXIT_RUN, EXIT_IO = 2, 3, 4, 5


def _common(p: argparse.ArgumentParser):
    p.add_argument("--profile", choices=["desk", "paper"], default=None)
    p.add_argument("--config", type=Path, default=None, help="flat JSON file of run settings")
    p.add_argument("--methods", default=None, help="comma-separated subset of Horseshoe,Lasso,Normal,NS,Ridge")
    p.add_argument("--seed", dest="base_seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shrinkvar", description="Shrinkage VAR simulation study")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one Monte Carlo scenario")
    sim.add_argument("--scenario", choices=["1", "2", "3"], required=True)
    sim.add_argument("--n-rep", dest="n_rep", type=int, default=None)
    sim.add_argument("--dim", dest="d", type=int, default=None, help="override the series dimension")
    sim.add_argument("--n-boot", dest="n_boot", type=int, default=None)
    sim.add_argument("--block-len", dest="block_len", type=int, default=None)
    _common(sim)

    can = sub.add_parser("canada", help="lag-order experiment on the Canadian macro data")
    can.add_argument("--data", type=Path, default=None, help="CSV with columns e,prod,rw,U")
    _common(can)

    rep = sub.add_parser("report", help="rebuild summaries and report.txt from a results directory")
    rep.add_argument("--in", dest="in_dir", required=True)
    rep.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args, target: str) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    flags = {
        k: getattr(args, k, None)
        for k in ("n_rep", "d", "n_boot", "block_len", "methods", "base_seed", "out", "chains", "iters", "warmup", "workers")
    }
    return build_config(profile=args.profile, file_values=file_values, target=target, **flags)


def cmd_simulate(args) -> int:
    run = _config(args, args.scenario)
    out = Path(run.out)
    t0 = time.perf_counter()
    cfg, records = run_scenario(run)
    write_records(out, records)
    (out / "run_config.json").write_text(run.to_json() + "\n")
    emit_report(out)
    log.info("%s: %d records in %.1fs -> %s", cfg.name, len(records), time.perf_counter() - t0, out)
    return 0


def cmd_canada(args) -> int:
    run = _config(args, "canada")
    data = load_canada(args.data)
    out = Path(run.out)
    t0 = time.perf_counter()
    res = run_canada(data, run)
    write_csv(out / CANADA_ERRORS, CANADA_ERROR_COLUMNS, res["errors"])
    write_csv(out / CANADA_FORECASTS, ["method", "p", "quarter", "series", "actual", "forecast"], res["forecasts"])
    write_csv(out / CANADA_COEFS, ["method", "p", "coef", "value"], res["coefficients"])
    (out / "run_config.json").write_text(run.to_json() + "\n")
    emit_report(out)
    log.info("canada: %d rows in %.1fs -> %s", len(res["errors"]), time.perf_counter() - t0, out)
    return 0


def cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise FileNotFoundError(f"results directory {in_dir} does not exist")
    emit_report(in_dir)
    return 0


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"simulate": cmd_simulate, "canada": cmd_canada, "report": cmd_report}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetError as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RunFailure as exc:
        print(f"error[run]: {exc}", file=sys.stderr)
        return EXIT_RUN
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
