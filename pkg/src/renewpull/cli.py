"""Command-line entry point.

Subcommands: optimize, shipping, prices, pull, import-study, sensitivity.
Exit codes: 0 success, 2 validation/configuration error, 3 solve failure,
4 missing upstream stage outputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from renewpull.esom.lp import SolveError
from renewpull.esom.model1 import ModelConfigError
from renewpull.manifest import ManifestError, load_manifest
from renewpull.pipeline import (
    StageDependencyError,
    run_import_study,
    run_optimize,
    run_prices,
    run_pull,
    run_sensitivity,
    run_shipping,
)
from renewpull.scenario import ScenarioError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVE = 3
EXIT_DEPENDENCY = 4

logger = logging.getLogger("renewpull")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="run manifest YAML")
    parser.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    parser.add_argument("--jobs", type=int, default=None, help="parallel worker count")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument(
        "--capital", choices=("uniform", "national"), default=None,
        help="capital cost mode",
    )
    parser.add_argument(
        "--uniform-rate", type=float, default=None, dest="uniform_rate",
        help="discount rate for the uniform capital mode",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renewpull",
        description="Production-cost optimization, import costing, and pull analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("optimize", "per-country system optimization"),
        ("shipping", "ports, route distances, voyage costs"),
        ("prices", "raw-material price table from trade records"),
        ("pull", "pull matrix and indicators"),
        ("import-study", "staged import options for the sink country"),
        ("sensitivity", "demand sensitivity sweep"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        if name == "import-study":
            p.add_argument("--sink", default=None, help="importing region (default: manifest)")
        if name == "sensitivity":
            p.add_argument("--region", required=True, help="region to sweep")
            p.add_argument(
                "--deltas", required=True,
                help="comma-separated annual demand offsets in MWh",
            )
    return parser


def _setup_logging(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    logger.setLevel(logging.INFO)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    logger.addHandler(console)
    # timestamps live here, never in result files
    logfile = logging.FileHandler(out_dir / "run.log", encoding="utf-8")
    logfile.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logger.addHandler(logfile)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "jobs": args.jobs,
        "out_dir": args.out,
        "capital_mode": args.capital,
        "uniform_rate": args.uniform_rate,
    }
    try:
        manifest = load_manifest(args.manifest, overrides=overrides)
    except (ManifestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _setup_logging(manifest.out_dir)

    try:
        if args.command == "optimize":
            failures = run_optimize(manifest)
            if failures:
                logger.error("%d country optimizations failed", failures)
                return EXIT_SOLVE
        elif args.command == "shipping":
            run_shipping(manifest)
        elif args.command == "prices":
            run_prices(manifest)
        elif args.command == "pull":
            run_pull(manifest)
        elif args.command == "import-study":
            run_import_study(manifest, sink=args.sink)
        elif args.command == "sensitivity":
            deltas = [float(v) for v in args.deltas.split(",") if v.strip()]
            run_sensitivity(manifest, args.region, deltas)
    except StageDependencyError as exc:
        logger.error("%s", exc)
        return EXIT_DEPENDENCY
    except (ScenarioError, ManifestError, ModelConfigError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except SolveError as exc:
        logger.error("%s", exc)
        return EXIT_SOLVE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
