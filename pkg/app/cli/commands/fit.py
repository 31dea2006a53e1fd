from typing import Dict, List

import numpy as np

from app.cli.output import emit, load_sample, prior_spec, summary
from app.repositories.file_repository import FileRepository
from app.schemas.mcmc import Chain
from app.schemas.report import RunConfig
from app.services.mcmc_service import diagnostics, merge_chains, propriety_status, sample_chains, summarise_return_level

NAME = "fit"
HELP = "sample the posterior by adaptive random-walk Metropolis"


def posterior_summary(chains: List[Chain]) -> Dict[str, Dict[str, float]]:
    out = {}
    for name in chains[0].names:
        values = np.concatenate([c.column(name) for c in chains])
        q05, q50, q95 = np.quantile(values, [0.05, 0.5, 0.95])
        out[name] = {
            "mean": float(values.mean()),
            "sd": float(values.std(ddof=1)),
            "q05": float(q05),
            "median": float(q50),
            "q95": float(q95),
        }
    return out


def fit_chains(cfg: RunConfig):
    spec = prior_spec(cfg)
    data = load_sample(cfg)
    size = data.n if hasattr(data, "n") else data.m
    claim = propriety_status(spec, size)[1]
    chains = sample_chains(data, spec, cfg.mcmc, cfg.chains, cfg.override_propriety)
    if cfg.chain_output:
        for i, chain in enumerate(chains):
            FileRepository.write_chain(chain, cfg.chain_output, chain_id=i)
    return spec, claim, chains


def run(cfg: RunConfig) -> int:
    spec, claim, chains = fit_chains(cfg)
    diag = diagnostics(chains)
    result = {
        "model": cfg.model,
        "prior": spec.model_dump(mode="json"),
        "propriety": claim,
        "seed": cfg.mcmc.seed,
        "chains": len(chains),
        "summary": posterior_summary(chains),
        "diagnostics": diag.model_dump(mode="json"),
    }
    lines = [f"{cfg.model.upper()} under {spec.family.value}: {diag.draws} draws, acceptance {diag.acceptance_rate:.3f}"]
    for name, s in result["summary"].items():
        lines.append(f"  {name:<6} mean {s['mean']:.5g}  sd {s['sd']:.5g}  90% [{s['q05']:.5g}, {s['q95']:.5g}]  ESS {diag.ess[name]:.0f}")

    if cfg.return_period is not None:
        rl = summarise_return_level(merge_chains(chains), cfg.return_period)
        result["return_level"] = rl.model_dump(mode="json")
        lines.append(f"  {cfg.return_period:g}-period return level {rl.median:.5g} [{rl.lower:.5g}, {rl.upper:.5g}]")
    summary(lines)
    emit(NAME, result, cfg)
    return 0
