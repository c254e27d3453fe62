import argparse
import logging
import sys
from typing import List, Optional

from pfmulti import __version__
from pfmulti.core.config import settings
from pfmulti.core.errors import PfmultiError
from pfmulti.core.logging import configure_logging
from pfmulti.models.system import SCHEMES
from pfmulti.services.oracles import critical_pressure_oracle

logger = logging.getLogger("pfmulti")

SUITE_NAMES = ("kernels", "jacobian", "oracles", "all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfmulti",
        description="Coupled phase field multiphysics finite element solver",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a benchmark configuration")
    run.add_argument("config", help="TOML run configuration")
    run.add_argument("--out", help=f"run directory (default {settings.OUTPUT_DIR}/<run name>)")
    run.add_argument("--max-increments", type=int, help="stop after this many increments")
    run.add_argument("--scheme", choices=SCHEMES, help="override the coupling scheme")

    verify = commands.add_parser("verify", help="run a verification suite")
    verify.add_argument("suite", choices=SUITE_NAMES)

    oracle = commands.add_parser("oracle", help="evaluate a closed-form reference")
    oracles = oracle.add_subparsers(dest="oracle", required=True)
    pc = oracles.add_parser("pc", help="critical pressure of a line crack in plane strain")
    pc.add_argument("--E", type=float, required=True, help="Young's modulus")
    pc.add_argument("--nu", type=float, required=True, help="Poisson's ratio")
    pc.add_argument("--gc", type=float, required=True, help="critical energy release rate")
    pc.add_argument("--a0", type=float, required=True, help="crack half-length")
    return parser


def _run(args) -> int:
    from pfmulti.services.runner import execute

    manifest = execute(args.config, out_dir=args.out, max_increments=args.max_increments,
                       scheme=args.scheme)
    print(f"✓ {manifest.name}: {manifest.increments} increments, t = {manifest.t_final:.6g}")
    for name in manifest.files:
        print(f"  {name}")
    return 0


def _verify(args) -> int:
    from pfmulti.services.verification import run_suite

    results = run_suite(args.suite)
    failed = [r for r in results if not r.passed]
    for result in results:
        print(f"{'✓' if result.passed else '✗'} {result}")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _oracle(args) -> int:
    try:
        value = critical_pressure_oracle(args.E, args.nu, args.gc, args.a0)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"{value:.6g}")
    return 0


HANDLERS = {"run": _run, "verify": _verify, "oracle": _oracle}


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(settings.LOG_LEVEL)
    try:
        return HANDLERS[args.command](args)
    except PfmultiError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
