"""Configuration management"""

from functools import lru_cache

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    """Process-wide numerical settings"""

    # Application
    app_name: str = "swift-decoherence"
    log_level: str = "INFO"
    out_dir: str = "out"
    default_seed: int = 7
    threads: int = 1

    # Angular quadrature
    quadrature_order: int = 64
    quadrature_max_order: int = 1024
    quadrature_rtol: float = 1e-9

    # Bath averages
    bath_quadrature_order: int = 16
    bath_quadrature_max_dim: int = 3
    bath_monte_carlo_samples: int = 200_000

    # Regime diagnostics
    forward_peak_threshold: float = 0.25
    km_mass_ratio_threshold: float = 10.0
    weak_scattering_threshold: float = 10.0

    # Decoherence rate
    decoherence_order_factor: float = 4.0
    decoherence_max_order: int = 8192

    # Ensemble solver
    sde_dt_safety: float = 0.01

    # Time grids, in units of 1/eta
    time_grid_start: float = 1e-4
    time_grid_end: float = 10.0
    time_grid_points: int = 200

    # Operator checks
    opcheck_boundary_tolerance: float = 1e-10

    model_config = SettingsConfigDict(
        env_prefix="SWIFTDECO_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is a known logging level name"""
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator(
        "quadrature_order",
        "quadrature_max_order",
        "bath_quadrature_order",
        "bath_monte_carlo_samples",
        "decoherence_max_order",
        "time_grid_points",
        "threads",
    )
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        """Validate counts are positive"""
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @field_validator(
        "quadrature_rtol",
        "forward_peak_threshold",
        "decoherence_order_factor",
        "sde_dt_safety",
        "time_grid_start",
        "time_grid_end",
        "opcheck_boundary_tolerance",
    )
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """Validate tolerances and factors are positive"""
        if not v > 0:
            raise ValueError("must be positive")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
