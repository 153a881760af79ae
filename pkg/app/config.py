"""
Configuration management for PPF-QSNN
"""
from typing import List, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings with validation"""

    model_config = SettingsConfigDict(
        env_prefix="PPF_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field("INFO")
    log_file: Optional[str] = Field(None)

    # Locations
    data_dir: str = Field("data/mnist")
    output_dir: str = Field("runs")

    # MNIST download (fetch is the only networked command)
    mnist_mirrors: List[str] = Field(
        default_factory=lambda: [
            "https://ossci-datasets.s3.amazonaws.com/mnist/",
            "https://storage.googleapis.com/cvdf-datasets/mnist/",
        ]
    )
    fetch_timeout: int = Field(120, gt=0)

    # Simulator memory guard
    max_qubits: int = Field(24, ge=1, le=30)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level


settings = Settings()
