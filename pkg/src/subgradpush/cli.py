"""
Command-line entry point::

    sgp graphcheck|pushsum|optimize|bounds|accept --config PATH [--out-dir PATH]

Exit codes: 0 ok, 1 violation, 2 config error, 3 runtime error.
"""

import argparse
import json
import sys

from .acceptance import acceptance_suite, format_report
from .config import ConfigError, load_config
from .harness import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VIOLATION, run_experiment

COMMANDS = ("graphcheck", "pushsum", "optimize", "bounds", "accept")
_ACCEPT_KEYS = {"seed", "lambda_override", "criteria", "out_dir"}


def _parser():
    p = argparse.ArgumentParser(prog="sgp", description="Subgradient-push simulator and bound checker.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration (optional for accept)")
    p.add_argument("--out-dir", help="directory for trace.csv / summary.json / report.json")
    return p


def _accept_options(path):
    if path is None:
        return {}
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    extra = sorted(set(raw) - _ACCEPT_KEYS)
    if extra:
        raise ConfigError(f"unknown key {extra[0]!r}")
    return raw


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "accept":
            opts = _accept_options(args.config)
            only = opts.get("criteria")
            report = acceptance_suite(
                base_seed=int(opts.get("seed", 0)),
                lambda_override=opts.get("lambda_override"),
                out_dir=args.out_dir or opts.get("out_dir"),
                only=set(only) if only is not None else None,
            )
            print(format_report(report))
            return EXIT_OK if report["passed"] else EXIT_VIOLATION
        if args.config is None:
            raise ConfigError(f"{args.command} needs --config")
        cfg = load_config(args.config)
        status, summary = run_experiment(cfg, args.command, args.out_dir)
        if args.command in ("pushsum", "optimize"):
            print(f"{args.command}: {summary['violation_count']} violation(s), "
                  f"runtime {summary['runtime_s']} s")
        return status
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
