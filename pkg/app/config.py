from contextlib import contextmanager
from typing import Any, Iterator

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Eigen solver contract
    EIG_RESIDUAL_FACTOR: float = 1e-8
    NORM_TOL: float = 1e-12

    # Zero modes / symmetry
    ZERO_TOL: float = 1e-8
    AXIS_TOL: float = 1e-8
    NHPH_TOL: float = 1e-8
    PARITY_THRESHOLD: float = 0.999
    BISECT_XTOL: float = 1e-13
    BISECT_MAX_ITER: int = 200
    SEED_SUBSTEPS: int = 24

    # Branch tracking and events
    TRACK_OVERLAP_FLOOR: float = 0.5
    DEGENERACY_TOL: float = 1e-9
    EP_GAP_TOL: float = 1e-4
    EP_OVERLAP_MIN: float = 0.99
    AVOIDED_WINDOW: float = 0.25
    GOLDEN_TOL: float = 1e-13

    # Diagnostics
    DIAGNOSTIC_TOL: float = 1e-6
    FLUX_TOL: float = 1e-9
    CONTINUITY_TOL: float = 1e-9
    EDGE_RATIO_TOL: float = 1e-3

    # Sweep defaults (units of t)
    SWEEP_LO: float = 0.0
    SWEEP_HI: float = 1.3
    SWEEP_STEP: float = 0.005
    SWEEP_REFINE: int = 10
    MAX_WORKERS: int = 4

    # Exact sequences
    LUCAS_MAX_BITS: int = 4096

    OUTPUT_DIR: str = "out"
    ENVIRONMENT: str = "local"

    model_config = SettingsConfigDict(env_prefix="LUCAS_", env_file=".env", extra="ignore")


settings = Settings()


@contextmanager
def overridden(**values: Any) -> Iterator[Settings]:
    """Temporarily replace settings fields; None values are ignored."""
    previous = {}
    for key, value in values.items():
        if value is None:
            continue
        if key not in Settings.model_fields:
            raise KeyError(key)
        previous[key] = getattr(settings, key)
        setattr(settings, key, value)
    try:
        yield settings
    finally:
        for key, value in previous.items():
            setattr(settings, key, value)
