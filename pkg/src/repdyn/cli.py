"""Command-line entry point.

Subcommands:
  run <config.json>   run one experiment preset, write a CSV result table
  validate            triangulation self-tests; nonzero exit on any failure
  list-strategies     show the strategy catalog and spec-string syntax

Exit codes: 0 success, 1 validation failure, 2 config error, 3 resource error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    CLASSIC_SPECS,
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    run,
    validation_checks,
)
from .game import GameParams, InvalidGameParams
from .payoff import ChainTooLargeError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

# Presets that draw random numbers and therefore demand an explicit seed.
STOCHASTIC_EXPERIMENTS = {"pairwise-replicator"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repdyn",
        description="Repeated-game strategy payoffs and evolutionary dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment preset from a JSON config")
    p_run.add_argument("config", help="path to the JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--output", default=None, help="override config output path")
    p_run.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override a config option (repeatable)",
    )
    p_run.add_argument(
        "--subsample", type=int, default=None,
        help="mem1-grid-vs-adco only: keep every k-th grid strategy",
    )

    p_val = sub.add_parser("validate", help="run the triangulation self-tests")
    p_val.add_argument("--seed", type=int, default=0)

    sub.add_parser("list-strategies", help="list known strategies and spec syntax")
    return parser


def _parse_override(item: str):
    if "=" not in item:
        raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
    key, _, raw = item.partition("=")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON (line {exc.lineno}, column {exc.colno}): "
            f"{exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path!r} must be a JSON object")
    return doc


def _cmd_run(args) -> int:
    doc = _load_config(args.config)
    for item in args.set:
        key, value = _parse_override(item)
        doc[key] = value
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.output is not None:
        doc["output"] = args.output
    if args.subsample is not None:
        doc["subsample"] = args.subsample
    config = ExperimentConfig.from_dict(doc)
    if config.experiment in STOCHASTIC_EXPERIMENTS and config.seed is None:
        raise ConfigError(
            f"experiment {config.experiment!r} is stochastic: pass --seed or set "
            "'seed' in the config (no silent nondeterminism)"
        )
    table = run(config)
    if config.output:
        print(f"wrote {len(table.rows)} rows to {config.output}")
    else:
        print(",".join(table.columns))
        for row in table.rows:
            print(",".join(str(v) for v in row))
    if config.experiment == "validate" and table.metadata.get("all_passed") != "true":
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_validate(args) -> int:
    checks = validation_checks(args.seed)
    failed = 0
    for name, ok, detail in checks:
        status = "pass" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"{status:4s}  {name}{suffix}")
        failed += not ok
    if failed:
        print(f"{failed} of {len(checks)} checks failed")
        return EXIT_VALIDATION
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def _cmd_list_strategies() -> int:
    print("named strategies: ALLC ALLD RANDOM TFT WSLS GRIM HardMajority")
    print("parameterized specs:")
    print("  AoN:K=<int>          all-or-none with cooperation threshold K")
    print("  ADCO:K=<int>,t=<int> adaptive coordination with tolerance t")
    print("  GTFT:q=<prob>        generous tit-for-tat")
    print("  ZD:chi=<factor>      extortionate zero-determinant strategy")
    print("  CURE:delta=<int>     cumulative reciprocity with tolerance delta")
    print("  M1:p_cc,p_cd,p_dc,p_dd  arbitrary memory-1 strategy")
    print(f"classic roster ({len(CLASSIC_SPECS)}): " + " ".join(CLASSIC_SPECS))
    print(f"experiments: {' '.join(EXPERIMENTS)}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_list_strategies()
    except (ConfigError, InvalidGameParams) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChainTooLargeError as exc:
        print(
            f"resource error: {exc}\nhint: raise the state cap, use --subsample, "
            "or switch the pair to Monte Carlo",
            file=sys.stderr,
        )
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
