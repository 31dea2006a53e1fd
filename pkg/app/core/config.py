from typing import List, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="EVPRIOR_", env_file=".env", extra="ignore")

    # Default run-config file (flat key=value), overridden by --config
    CONFIG: Optional[str] = None
    LOG_LEVEL: str = "INFO"

    # Propriety lab
    QUAD_XI_HALF_WIDTH: float = 4.0
    QUAD_LOG_U_HALF_WIDTH: float = 4.0
    QUAD_DOUBLING_LIMIT: int = 12
    QUAD_CELL_TOL: float = 1e-8
    QUAD_GROWTH_FACTOR: float = 1.01
    QUAD_CELL_LIMIT: int = 200

    # Sampler
    MCMC_ITERATIONS: int = 20000
    MCMC_BURN_IN: int = 5000
    MCMC_THINNING: int = 1
    MCMC_TARGET_ACCEPTANCE: float = 0.234
    MCMC_ADAPT_WINDOW: int = 200
    MCMC_SEED: int = 20240611
    # Worker processes for independent chains; None uses one per CPU
    MCMC_WORKERS: Optional[int] = None

    allowed_extensions: List[str] = [".csv", ".txt", ".dat", ".xlsx"]
    max_file_size: int = 200 * 1024 * 1024


settings = Settings()
