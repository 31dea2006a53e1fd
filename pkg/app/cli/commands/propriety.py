from app.cli.output import emit, load_sample, prior_spec, summary
from app.schemas.params import BlockMaximaSample, ExcessSample, NhppData
from app.schemas.propriety import VerdictStatus
from app.schemas.report import RunConfig
from app.services.propriety_service import estimate_gev_const, estimate_gp_const

NAME = "propriety"
HELP = "estimate the posterior normalising constant and report a propriety verdict"


def run(cfg: RunConfig) -> int:
    spec = prior_spec(cfg)
    sample = load_sample(cfg)
    if isinstance(sample, ExcessSample):
        verdict = estimate_gp_const(sample, spec, cfg.quad)
    else:
        if isinstance(sample, NhppData):
            # the NHPP posterior is bounded by the GEV posterior with y = x
            sample = BlockMaximaSample(maxima=sample.exceedances)
        verdict = estimate_gev_const(sample, spec, cfg.quad)

    lines = [f"{spec.family.value}, {cfg.model.upper()}: {verdict.status.value}"]
    if verdict.estimate is not None:
        lines.append(f"normalising constant ~ {verdict.estimate:.8g}")
    lines.append(verdict.evidence)
    lines.extend(verdict.diagnostics)
    summary(lines)
    emit(NAME, {"model": cfg.model, "prior": spec.model_dump(mode="json"), "verdict": verdict.model_dump(mode="json")}, cfg)
    return 2 if verdict.status == VerdictStatus.INCONCLUSIVE else 0
