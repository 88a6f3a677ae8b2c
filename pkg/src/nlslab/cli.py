"""Command line front-end for the nlslab experiments.

    nlslab groundstate --config run.toml --out results/
    nlslab stability --config run.toml --seed 3 --check

The subcommand names the experiment; it must agree with ``experiment`` in the
config file when that key is present. Exit codes: 0 success, 2 invalid
configuration, 3 numerical abort, 4 verdict failure under ``--check``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import (
    EXPERIMENTS,
    ConfigError,
    RunConfig,
    config_from_dict,
    locator,
    parse_config,
    render_config,
)
from .runner import EXIT_PARSE, OUT_ENV, run

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlslab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        sp.add_argument("--out", type=Path, default=None,
                        help=f"output directory (default: config, then ${OUT_ENV}, then ./nlslab-out)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=1, help="worker pool size for sweeps")
        sp.add_argument("--override-supercritical", action="store_true",
                        help="accept exponents outside the subcritical range")
        sp.add_argument("--check", action="store_true",
                        help="exit with 4 when the experiment's verdict fails")
        sp.add_argument("--echo", action="store_true",
                        help="print the fully materialized config and exit")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load(args) -> RunConfig:
    text = args.config.read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError:
        return parse_config(text)  # raises ConfigError with the location
    given = doc.setdefault("experiment", args.experiment)
    if given != args.experiment:
        raise ConfigError(f"config is for {given!r}, not {args.experiment!r}", "experiment")
    if args.seed is not None:
        doc["seed"] = args.seed
    return config_from_dict(doc, locator(text), override_supercritical=args.override_supercritical)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = _load(args)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.echo:
        sys.stdout.write(render_config(cfg))
        return 0
    manifest = run(cfg, out=args.out, threads=args.threads)
    for job in manifest.jobs:
        line = f"{job.name}: {job.status}"
        if job.message:
            line += f" ({job.message})"
        print(line)
    print(f"manifest: {Path(manifest.output_dir) / 'manifest.json'}")
    return manifest.exit_code(check=args.check)


if __name__ == "__main__":
    sys.exit(main())
