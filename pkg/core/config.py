"""Application configuration settings."""

import os
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings; experiment parameters live in the TOML config files."""

    model_config = SettingsConfigDict(
        env_prefix="WZ_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = Field(default="Wong-Zakai Lab", description="Application name")
    version: str = Field(default="1.0.0", description="Artifact version written into manifests")
    debug: bool = Field(default=False, description="Debug mode: DEBUG logging unless a level is given")
    log_level: str = Field(default="INFO", description="Root log level for the wong_zakai logger")

    # Execution settings
    threads: int = Field(default=0, description="Worker threads for path ensembles (0 = machine parallelism)")
    progress: bool = Field(default=False, description="Show tqdm progress bars for path ensembles")
    output_dir: str = Field(default="runs", description="Default output directory for reports")
    config_hash_length: int = Field(default=16, description="Hex digits of the config hash kept in reports")

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        """Validate thread count is non-negative."""
        if v < 0:
            raise ValueError("Thread count must be non-negative")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level name."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("config_hash_length")
    @classmethod
    def validate_hash_length(cls, v: int) -> int:
        """Validate hash truncation length."""
        if not 8 <= v <= 64:
            raise ValueError("Config hash length must be between 8 and 64")
        return v

    def resolve_threads(self, flag: int | None = None) -> int:
        """Thread count with precedence flag > environment > machine parallelism."""
        if flag is not None and flag > 0:
            return flag
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
