"""Application configuration using Pydantic settings."""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from environment variables prefixed with ``QFI_OPTICS_``."""

    model_config = SettingsConfigDict(
        env_prefix="QFI_OPTICS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Runtime
    log_level: str = "info"
    threads: int | None = None

    # Numerics
    kkt_tolerance: float = 1e-7
    max_iterations: int = 100_000
    eigen_tolerance: float = 1e-12

    # Monte Carlo
    seed: int = 20090415


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
