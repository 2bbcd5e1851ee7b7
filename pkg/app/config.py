"""
Seirkit Configuration
"""
import logging
import os
import sys
from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Toolkit settings loaded from environment."""

    # App settings
    app_name: str = "Seirkit"
    app_version: str = "0.1.0"
    debug: bool = False
    log_level: str = "INFO"

    # Server
    host: str = "0.0.0.0"
    port: int = 8080

    # Where CLI runs write manifests, CSV and JSON-lines (relative or absolute)
    output_dir: str = "./runs"

    # Simulation limits
    event_cap_factor: int = 50  # events per susceptible before a conserving run aborts
    max_events: int = 50_000_000  # cap for open or reduced models
    takeoff_min: int = 20
    threads: Optional[int] = None  # None means os.cpu_count()
    max_http_replicas: int = 10_000

    # Final-size numerics
    float64_warn_n: int = 40
    high_precision_bits: int = 256
    rational_max_n: int = 120
    chain_binomial_max_n: int = 25

    # Deterministic paths
    default_init_fraction: float = 1e-4
    ode_steps: int = 10_000

    class Config:
        env_file = ".env"
        env_prefix = "SEIRKIT_"
        extra = "ignore"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        # Railway sets PORT without prefix - check for it
        if "PORT" in os.environ:
            self.port = int(os.environ["PORT"])

    @property
    def worker_count(self) -> int:
        return self.threads or os.cpu_count() or 1


@lru_cache()
def get_settings() -> Settings:
    return Settings()


# Paths
BASE_DIR = Path(__file__).parent.parent


def get_output_dir(override: Optional[str] = None) -> Path:
    """Get the run output directory, creating it if needed."""
    out = Path(override or get_settings().output_dir)
    if not out.is_absolute():
        out = Path.cwd() / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def configure_logging(level: Optional[str] = None) -> None:
    """Send toolkit logs to stderr; stdout carries JSON summaries only."""
    logger = logging.getLogger("app")
    logger.setLevel((level or get_settings().log_level).upper())
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        logger.addHandler(handler)
