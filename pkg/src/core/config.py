from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List

class Settings(BaseSettings):
    PROJECT_NAME: str = "Hyperspectral Sparse Reconstruction"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"

    # Execution
    MAX_WORKERS: int = 4
    OUTPUT_DIR: str = "./out"
    DEFAULT_SEED: int = 0

    # Acquisition model (calibrated on a 1500 µm scan at 0.5 µm rows = 90 min)
    SECONDS_PER_ROW: float = 1.8
    REFERENCE_WAVENUMBER_CM1: float = 1660.0
    WAVENUMBER_MATCH_TOLERANCE_CM1: float = 0.5

    # Amide I reference plus the 27 sparsely sampled bands
    DEFAULT_WAVENUMBERS_CM1: List[float] = [
        908, 974, 984, 1036, 1070, 1102, 1136, 1178, 1238, 1280, 1300, 1325, 1358, 1396,
        1420, 1456, 1482, 1500, 1536, 1556, 1596, 1610, 1660, 1662, 1668, 1682, 1746, 1786,
    ]

    # Persisted model documents
    FORMAT_VERSION: int = 1

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

settings = Settings()
