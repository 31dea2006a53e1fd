import numpy as np

from app.cli.output import emit, prior_spec, summary
from app.repositories.file_repository import FileRepository
from app.schemas.prior import PriorFamily, PriorSpec
from app.schemas.report import RunConfig
from app.services.prior_service import prior_catalog, scaled_prior_curve

NAME = "priors"
HELP = "prior catalog and scaled prior curves on a xi grid (figure data)"


def _specs(cfg: RunConfig):
    if cfg.prior is not None:
        return [prior_spec(cfg)]
    specs = []
    for family in PriorFamily:
        if family == PriorFamily.JEFFREYS_GEV_TRUNC and cfg.xi_upper is None:
            continue
        upper = cfg.xi_upper if family == PriorFamily.JEFFREYS_GEV_TRUNC else None
        specs.append(PriorSpec(family=family, xi_upper=upper))
    return specs


def run(cfg: RunConfig) -> int:
    grid = np.linspace(cfg.grid_min, cfg.grid_max, cfg.grid_points)
    families, xs, ys = [], [], []
    curves = {}
    for spec in _specs(cfg):
        y = scaled_prior_curve(spec, grid)
        curves[spec.family.value] = {"x": grid.tolist(), "y": y.tolist()}
        families.extend([spec.family.value] * len(grid))
        xs.extend(grid.tolist())
        ys.extend(y.tolist())

    if cfg.data_output:
        FileRepository.write_table({"family": families, "x": xs, "y": ys}, cfg.data_output)
    summary([f"{name}: {len(c['x'])} points on [{cfg.grid_min:g}, {cfg.grid_max:g}]" for name, c in curves.items()])
    emit(NAME, {"catalog": [e.model_dump(mode="json") for e in prior_catalog()], "curves": curves}, cfg)
    return 0
