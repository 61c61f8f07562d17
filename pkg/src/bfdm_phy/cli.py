"""Command-line entry point ``bfdm-phy``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, NumericalError
from .gabor import SampledSignal
from .sim.config import load_config
from .sim.experiments import THREADS_ENV, chanest_from_samples, detect_from_samples, run_scenario
from .sim.results import rows_to_csv

__all__ = ["main", "SUBCOMMANDS"]

SUBCOMMANDS = {
    "pulse": ["pulse"],
    "bound": ["bound"],
    "ici-sweep": ["ici"],
    "ser-sweep": None,
    "pusch-sweep": ["pusch"],
    "psd": ["psd"],
    "detect": ["detect"],
    "chanest": ["chanest"],
}
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bfdm-phy",
        description="Pulse-shaped random access simulator. Results are written as long-format CSV.",
        epilog=f"The worker thread count is read from the {THREADS_ENV} environment variable (default 1).",
    )
    p.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    p.add_argument("--config", help="JSON scenario file (default: the table1 preset)")
    p.add_argument("--seed", help="unsigned 64-bit seed overriding the config")
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument(
        "--input",
        help="received samples as CSV (index, re, im) for detect and chanest; "
        "without it these subcommands run their Monte Carlo experiment",
    )
    return p


def _load(args):
    doc = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", ["config"]) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}", ["config"]) from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    if args.seed is not None:
        try:
            seed = int(args.seed, 10)
        except ValueError:
            raise ConfigError(f"seed {args.seed!r} is not an integer", ["seed"]) from None
        doc = {**doc, "seed": seed}
    exps = SUBCOMMANDS[args.subcommand]
    if exps is None:
        listed = [e for e in doc.get("experiments", []) if e in ("ser-offset", "ser-snr")]
        exps = listed or ["ser-offset"]
    return load_config({**doc, "experiments": exps})


def _from_samples(args, cfg):
    runners = {"detect": detect_from_samples, "chanest": chanest_from_samples}
    if args.subcommand not in runners:
        raise ConfigError(f"--input is not supported by {args.subcommand}", ["input"])
    try:
        r = SampledSignal.from_csv(args.input, cfg.ts)
        return runners[args.subcommand](cfg, r)
    except ConfigError:
        raise
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot use input samples: {exc}", ["input"]) from exc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.input:
            rows = _from_samples(args, cfg)
        else:
            rows = run_scenario(cfg)
        text = rows_to_csv(rows)
    except ConfigError as exc:
        print(f"bfdm-phy: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"bfdm-phy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
