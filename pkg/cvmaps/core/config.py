from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Project
    PROJECT_NAME: str = "cvmaps"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Sweep execution
    WORKERS: int = Field(default=4, ge=1)

    # Paths
    DEFAULT_CONFIG: Path = Path("configs/baseline.json")
    OUTPUT_DIR: Path = Path("results")

    model_config = SettingsConfigDict(
        env_prefix="CVMAPS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
