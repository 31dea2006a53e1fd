"""
Shared flags and the merge of settings, run-config file and flags into a
RunConfig. Every config-file key is the long flag name with '-' replaced
by '_'.
"""
import argparse
import logging
import os
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import UsageError
from app.schemas.mcmc import McmcConfig
from app.schemas.propriety import QuadConfig
from app.schemas.report import RunConfig

logger = logging.getLogger(__name__)

RUN_KEYS = (
    "model", "prior", "xi_lower", "xi_upper", "threshold", "block_size", "n_blocks", "mode",
    "input", "output", "chain_output", "data_output", "override_propriety", "return_period",
    "mu", "sigma", "xi", "count", "grid_min", "grid_max", "grid_points", "chains",
)
MCMC_KEYS = ("iterations", "burn_in", "thinning", "target_acceptance", "adapt_window", "seed", "workers")
QUAD_KEYS = ("xi_half_width", "log_u_half_width", "doubling_limit", "cell_tol", "growth_factor", "cell_limit")
CONFIG_KEYS = RUN_KEYS + MCMC_KEYS + QUAD_KEYS


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Every key has a flag twin; defaults stay None so unset flags do not mask file values."""
    parser.add_argument("--config", help="flat key=value run-config file")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    data = parser.add_argument_group("data and model")
    data.add_argument("--model", help="gp, gev or nhpp")
    data.add_argument("--prior", help="prior family, e.g. mdi_gp_trunc")
    data.add_argument("--xi-lower", type=float)
    data.add_argument("--xi-upper", type=float)
    data.add_argument("--threshold", type=float)
    data.add_argument("--block-size", type=int)
    data.add_argument("--n-blocks", type=int, help="notional block count of the NHPP model (default m)")
    data.add_argument("--mode", help="excesses, maxima, raw+threshold or raw+blocks")
    data.add_argument("--input", help="input data file")

    out = parser.add_argument_group("outputs")
    out.add_argument("--output", help="JSON result document (stdout when omitted)")
    out.add_argument("--chain-output", help="CSV file of retained draws")
    out.add_argument("--data-output", help="CSV file of figure or simulated data")

    run = parser.add_argument_group("run parameters")
    run.add_argument("--override-propriety", action="store_const", const=True, default=None)
    run.add_argument("--return-period", type=float)
    run.add_argument("--mu", type=float)
    run.add_argument("--sigma", type=float)
    run.add_argument("--xi", type=float)
    run.add_argument("--count", type=int)
    run.add_argument("--grid-min", type=float)
    run.add_argument("--grid-max", type=float)
    run.add_argument("--grid-points", type=int)
    run.add_argument("--chains", type=int)

    mcmc = parser.add_argument_group("sampler")
    mcmc.add_argument("--iterations", type=int)
    mcmc.add_argument("--burn-in", type=int)
    mcmc.add_argument("--thinning", type=int)
    mcmc.add_argument("--target-acceptance", type=float)
    mcmc.add_argument("--adapt-window", type=int)
    mcmc.add_argument("--seed", type=int)
    mcmc.add_argument("--workers", type=int, help="processes for independent chains (default one per CPU)")

    quad = parser.add_argument_group("propriety lab")
    quad.add_argument("--xi-half-width", type=float)
    quad.add_argument("--log-u-half-width", type=float)
    quad.add_argument("--doubling-limit", type=int)
    quad.add_argument("--cell-tol", type=float)
    quad.add_argument("--growth-factor", type=float)
    quad.add_argument("--cell-limit", type=int)


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise UsageError(f"Config file {path} does not exist")
    values = {k.strip().lower().replace("-", "_"): v for k, v in dotenv_values(path).items()}
    unknown = sorted(k for k in values if k not in CONFIG_KEYS)
    if unknown:
        raise UsageError(f"Unknown config key(s) in {path}: {', '.join(unknown)}")
    empty = sorted(k for k, v in values.items() if v is None or v == "")
    if empty:
        raise UsageError(f"Config key(s) without a value in {path}: {', '.join(empty)}")
    return values


def merge_values(args: argparse.Namespace, file_values: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    merged = dict(file_values or {})
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def build_run_config(values: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig(
            **{k: values[k] for k in RUN_KEYS if k in values},
            mcmc=McmcConfig(**{k: values[k] for k in MCMC_KEYS if k in values}),
            quad=QuadConfig(**{k: values[k] for k in QUAD_KEYS if k in values}),
        )
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise UsageError(f"Invalid value for {where}: {first['msg']}")


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """settings defaults < config file < flags."""
    path = args.config or settings.CONFIG
    file_values = read_config_file(path) if path else {}
    if path:
        logger.info(f"Loaded {len(file_values)} key(s) from {path}")
    return build_run_config(merge_values(args, file_values))
