"""
Configuration settings for the reconstruction toolkit.

This module contains all configuration variables including paths,
logging options, enumeration caps and the sizes of the randomized
acceptance suites.
"""

from pathlib import Path
from typing import Optional
try:
    from pydantic_settings import BaseSettings # type: ignore
except ImportError:
    from pydantic import BaseSettings # type: ignore


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Application settings
    APP_NAME: str = "Reconstruct"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Paths
    BASE_DIR: Path = Path(__file__).parent.parent
    LOG_DIR: Path = BASE_DIR / "logs"

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_TO_FILE: bool = False

    # Enumeration caps
    MAX_FAMILY_SIZE: int = 16
    ENUMERATION_CAP: int = 1 << 16
    NORMALIZER_SEARCH_CAP: int = 1 << 12
    COVER_SIZE_BOUND: Optional[int] = None

    # Randomized suites
    DEFAULT_SEED: int = 42
    REL2_RANDOM_PAIRS: int = 500
    IDE2_SECTION_SAMPLES: int = 200
    BAS1_RANDOM_CASES: int = 1000
    CLA2_RANDOM_PAIRS: int = 2000

    # Reports
    REPORT_TIMING: bool = False

    class Config:
        env_file = ".env"
        case_sensitive = True


# Global settings instance
settings = Settings()
