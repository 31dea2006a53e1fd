from app.cli.commands.fit import fit_chains
from app.cli.output import emit, require, summary
from app.schemas.report import RunConfig
from app.services.mcmc_service import merge_chains, summarise_return_level

NAME = "return-level"
HELP = "fit the posterior and summarise the T-period return level"


def run(cfg: RunConfig) -> int:
    require(cfg, "return_period")
    spec, claim, chains = fit_chains(cfg)
    rl = summarise_return_level(merge_chains(chains), cfg.return_period)
    summary([
        f"{cfg.return_period:g}-period return level under {spec.family.value}",
        f"  mean {rl.mean:.6g}  median {rl.median:.6g}  {rl.level:.0%} interval [{rl.lower:.6g}, {rl.upper:.6g}]",
    ])
    emit(NAME, {
        "model": cfg.model,
        "prior": spec.model_dump(mode="json"),
        "propriety": claim,
        "seed": cfg.mcmc.seed,
        "return_level": rl.model_dump(mode="json"),
    }, cfg)
    return 0
