import argparse
import logging
from typing import List, Optional

from pydantic import ValidationError

from app.cli.commands import fit, ingest, priors, propriety, return_level, simulate, theorems
from app.cli.options import add_common_arguments, load_run_config
from app.core.exceptions import EvpriorError
from app.core.logging_config import setup_logging

logger = logging.getLogger(__name__)

COMMANDS = {m.NAME: m for m in (ingest, priors, propriety, theorems, fit, return_level, simulate)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evprior",
        description="Reference-prior inference for extreme-value models and a numerical propriety lab",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, module in COMMANDS.items():
        add_common_arguments(sub.add_parser(name, help=module.HELP, description=module.HELP))
    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Runs one subcommand and returns its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; usage errors are 1 here
        return 0 if e.code == 0 else 1

    setup_logging(args.log_level)
    try:
        cfg = load_run_config(args)
        return COMMANDS[args.command].run(cfg)
    except EvpriorError as e:
        logger.error(f"{args.command}: {e.detail}")
        return e.exit_code
    except ValidationError as e:
        first = e.errors()[0]
        logger.error(f"{args.command}: invalid value for {'.'.join(str(p) for p in first['loc'])}: {first['msg']}")
        return 1
