import numpy as np

from app.cli.output import emit, require, summary
from app.core.exceptions import UsageError
from app.repositories.file_repository import FileRepository
from app.schemas.params import GevParams, GpParams
from app.schemas.report import RunConfig
from app.services.evd_service import gev_sample, gp_sample

NAME = "simulate"
HELP = "simulate GP excesses or GEV maxima by inversion"


def run(cfg: RunConfig) -> int:
    require(cfg, "model")
    rng = np.random.default_rng(cfg.mcmc.seed)
    if cfg.model == "gp":
        params = GpParams(sigma=cfg.sigma, xi=cfg.xi)
        values = gp_sample(params, cfg.count, rng)
        header = "excess"
    elif cfg.model == "gev":
        params = GevParams(mu=cfg.mu, sigma=cfg.sigma, xi=cfg.xi)
        values = gev_sample(params, cfg.count, rng)
        header = "maximum"
    else:
        raise UsageError("simulate supports the gp and gev models")

    if cfg.data_output:
        FileRepository.write_values(values, cfg.data_output, header=header)
    summary([f"{cfg.count} {cfg.model.upper()} draws with {params.model_dump()} (seed {cfg.mcmc.seed})"])
    emit(NAME, {
        "model": cfg.model,
        "params": params.model_dump(),
        "seed": cfg.mcmc.seed,
        "count": cfg.count,
        "path": cfg.data_output,
        "values": values.tolist(),
    }, cfg)
    return 0
