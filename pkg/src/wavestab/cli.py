"""Command-line front end.

    wavestab verify     [--config PATH] [--out DIR] [--seed N] [--suite NAME ...]
    wavestab stability  [--config PATH] [--out DIR] [--seed N]
    wavestab rates      [--config PATH] [--out DIR] [--seed N]
    wavestab plots      [--out DIR] [REPORT ...]
    wavestab --print-config [--config PATH] [--seed N]

Exit codes: 0 when every suite or flag passes, 1 when any fails (the failing
names go to stderr), 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .experiments import ExperimentConfig, oracle_pair, run_rates, run_stability, run_verify, write_report
from .io import GO_COLUMNS, write_field_binary, write_rows_csv
from .plots import emit_plots

log = logging.getLogger("wavestab")

STABILITY_COLUMNS = ["epsilon", "dn_norm", "dV_l2", "dalpha_hm1", "q_hm1", "recovered_sum", "dalpha_hm1_oracle",
                     "q_hm1_oracle", "magnetic_median_error", "electric_median_error", "config_hash"]
CHAIN_COLUMNS = ["epsilon", "name", "lhs", "rhs", "ratio"]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="JSON config (defaults embedded)")
    p.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--seed", metavar="N", type=int, default=argparse.SUPPRESS, help="override the config seed")
    p.add_argument("--print-config", action="store_true", default=argparse.SUPPRESS,
                   help="print the effective config as JSON and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavestab", description=__doc__.split("\n\n")[0])
    _common(parser)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command")
    v = sub.add_parser("verify", help="run the verification suites")
    _common(v)
    v.add_argument("--suite", action="append", metavar="NAME", help="run only this suite (repeatable)")
    _common(sub.add_parser("stability", help="run the stability study over the contrast sweep"))
    _common(sub.add_parser("rates", help="run the mollifier and GO rate fits"))
    p = sub.add_parser("plots", help="render SVGs from existing reports")
    _common(p)
    p.add_argument("reports", nargs="*", metavar="REPORT", help="report.json files (default: every report under --out)")
    return parser


def load_config(args) -> ExperimentConfig:
    path = getattr(args, "config", None)
    config = ExperimentConfig.load(path) if path else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    return config


def _out_dir(args, config: ExperimentConfig) -> Path:
    out = getattr(args, "out", None)
    if out:
        return Path(out)
    return Path(config.out) / args.command if args.command != "plots" else Path(config.out)


def _report_failure(names) -> int:
    for n in names:
        print(f"FAILED: {n}", file=sys.stderr)
    return 1 if names else 0


def cmd_verify(args, config: ExperimentConfig, out: Path) -> int:
    report = run_verify(config, args.suite)
    write_report(report, out)
    rows = [{"suite": s, "check": c, "passed": ok} for s, r in report["suites"].items() for c, ok in r["checks"].items()]
    write_rows_csv(out / "suites.csv", rows, ["suite", "check", "passed"])
    if "go_rates" in report["suites"]:
        write_rows_csv(out / "go_rates.csv", report["suites"]["go_rates"]["metrics"]["rows"], GO_COLUMNS)
    g = config.geometry.grid()
    p1, p2 = oracle_pair(config, g)
    write_field_binary(out / "oracle_pair.bin", np.concatenate([p1.A, p1.q[None], p2.A, p2.q[None]]), g.h)
    return _report_failure(report["failed"])


def cmd_stability(args, config: ExperimentConfig, out: Path) -> int:
    report = run_stability(config)
    write_report(report, out)
    write_rows_csv(out / "stability_rows.csv", report["rows"], STABILITY_COLUMNS)
    write_rows_csv(out / "mirror_rows.csv", report["mirror_rows"], ["epsilon", "dn_norm", "dV_l2"])
    chain = [{"epsilon": r["epsilon"], **{k: lk[k] for k in ("name", "lhs", "rhs", "ratio")}}
             for r in report["rows"] for lk in r["chain"]["links"]]
    write_rows_csv(out / "chain_links.csv", chain, CHAIN_COLUMNS)
    g = config.geometry.grid()
    base, W = config.family.fields(g)
    write_field_binary(out / "family.bin", np.concatenate([base.values, W.values]), g.h)
    emit_plots(report, out)
    return _report_failure([k for k, ok in report["flags"].items() if not ok])


def cmd_rates(args, config: ExperimentConfig, out: Path) -> int:
    report = run_rates(config)
    write_report(report, out)
    write_rows_csv(out / "rates_table.csv", report["table"], ["name", "slope", "target", "tolerance", "kind", "passed"])
    write_rows_csv(out / "go_rates.csv", report["go_rows"], GO_COLUMNS)
    m = report["mollifier"]
    write_rows_csv(out / "mollifier_rates.csv",
                   [{"lambda": lam, "sup_error": a, "second_difference": b}
                    for lam, a, b in zip(m["lambdas"], m["sup_error"], m["second_difference"])],
                   ["lambda", "sup_error", "second_difference"])
    emit_plots(report, out)
    return _report_failure([t["name"] for t in report["table"] if not t["passed"]])


def cmd_plots(args, config: ExperimentConfig, out: Path) -> int:
    paths = [Path(p) for p in args.reports] or sorted(out.glob("**/report.json"))
    if not paths:
        raise ConfigurationError(f"no report.json found under {out}")
    for p in paths:
        try:
            report = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read report {p}: {exc}") from exc
        for svg in emit_plots(report, p.parent):
            print(svg)
    return 0


COMMANDS = {"verify": cmd_verify, "stability": cmd_stability, "rates": cmd_rates, "plots": cmd_plots}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = load_config(args)
        if getattr(args, "print_config", False):
            print(config.to_json())
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        if args.command != "plots":
            config.validate()
        out = _out_dir(args, config)
        if args.command != "plots":
            out.mkdir(parents=True, exist_ok=True)
        log.info("%s: config hash %s, output %s", args.command, config.hash()[:12], out)
        return COMMANDS[args.command](args, config, out)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
