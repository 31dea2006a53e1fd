from app.cli.output import emit, require, summary
from app.repositories.file_repository import FileRepository
from app.schemas.params import BlockMaximaSample, ExcessSample
from app.schemas.report import RunConfig
from app.services.ingestion_service import ingest_file

NAME = "ingest"
HELP = "read a data file into excesses, block maxima or NHPP exceedances"


def run(cfg: RunConfig) -> int:
    require(cfg, "input", "mode")
    sample = ingest_file(cfg.input, cfg.mode, cfg.model, cfg.threshold, cfg.block_size, cfg.n_blocks)
    if isinstance(sample, ExcessSample):
        kind, values = "excesses", sample.excesses
        result = {"type": kind, "threshold": sample.threshold, "size": sample.m, "values": values}
    elif isinstance(sample, BlockMaximaSample):
        kind, values = "maxima", sample.maxima
        result = {"type": kind, "block_size": sample.block_size, "size": sample.n, "values": values}
    else:
        kind, values = "exceedances", sample.exceedances
        result = {
            "type": kind, "threshold": sample.threshold, "n_blocks": sample.n_blocks,
            "size": sample.m, "values": values,
        }
    if cfg.data_output:
        FileRepository.write_values(values, cfg.data_output, header=kind)
    summary([f"{len(values)} {kind} from {cfg.input} (min {min(values):g}, max {max(values):g})"])
    emit(NAME, result, cfg)
    return 0
