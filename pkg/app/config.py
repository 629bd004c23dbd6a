"""
GridComply Application Configuration
"""
from pydantic_settings import BaseSettings
from pydantic import Field
from functools import lru_cache


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # Application
    app_name: str = Field(default="GridComply", alias="APP_NAME")
    app_env: str = Field(default="development", alias="APP_ENV")
    app_debug: bool = Field(default=False, alias="APP_DEBUG")
    app_url: str = Field(default="http://localhost:8000", alias="APP_URL")

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    # Numerical tolerances
    hermitian_tol: float = Field(default=1e-9, alias="HERMITIAN_TOL")
    psd_tol: float = Field(default=1e-9, alias="PSD_TOL")
    axis_pole_tol: float = Field(default=1e-9, alias="AXIS_POLE_TOL")
    resolvent_tol: float = Field(default=1e-9, alias="RESOLVENT_TOL")
    grid_pole_tol: float = Field(default=1e-6, alias="GRID_POLE_TOL")
    properness_tol: float = Field(default=1e-10, alias="PROPERNESS_TOL")
    inverse_cond_limit: float = Field(default=1e8, alias="INVERSE_COND_LIMIT")
    zero_eig_tol: float = Field(default=1e-8, alias="ZERO_EIG_TOL")
    trace_tol: float = Field(default=1e-10, alias="TRACE_TOL")
    pole_cluster_tol: float = Field(default=1e-6, alias="POLE_CLUSTER_TOL")
    cancel_tol: float = Field(default=1e-6, alias="CANCEL_TOL")

    # Frequency ranges (Hz)
    low_band_hz: float = Field(default=10.0, alias="LOW_BAND_HZ")
    high_band_hz: float = Field(default=35.0, alias="HIGH_BAND_HZ")
    low_range_min_hz: float = Field(default=0.01, alias="LOW_RANGE_MIN_HZ")
    high_range_max_hz: float = Field(default=200.0, alias="HIGH_RANGE_MAX_HZ")
    grid_points: int = Field(default=400, alias="GRID_POINTS")

    # Interface transforms
    default_tau: float = Field(default=0.01, alias="DEFAULT_TAU")
    tau_warn_limit: float = Field(default=0.1, alias="TAU_WARN_LIMIT")

    # Vector fitting
    fit_max_iters: int = Field(default=30, alias="FIT_MAX_ITERS")
    fit_pole_tol: float = Field(default=1e-6, alias="FIT_POLE_TOL")
    fit_auto_target: float = Field(default=1e-4, alias="FIT_AUTO_TARGET")
    fit_max_order: int = Field(default=64, alias="FIT_MAX_ORDER")
    fit_accept_error: float = Field(default=1e-3, alias="FIT_ACCEPT_ERROR")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


# Slow/fast eigenvalue separation (rad/s): 10 Hz and 35 Hz
CLUSTER_BOUNDS = {
    "slow_max": 62.8,
    "fast_min": 220.0
}

# Frequency scan CSV layout
SCAN_CSV_COLUMNS = [
    "freq_hz",
    "re_y11", "im_y11",
    "re_y12", "im_y12",
    "re_y21", "im_y21",
    "re_y22", "im_y22"
]

# Min-eigenvalue curve CSV layout
CURVE_CSV_COLUMNS = ["freq_hz", "eig1", "eig2"]

# CLI exit codes
EXIT_CODES = {
    "pass": 0,
    "fail": 1,
    "input_error": 2
}

# Consolidated compliance criteria
COMPLIANCE_STEPS = {
    1: "frequency_scan",
    2: "rational_fit",
    3: "cluster_separation",
    4: "high_frequency_passivity",
    5: "kqv_margin",
    6: "frequency_regulation",
    7: "properness",
    8: "low_frequency_passivity"
}

# Supported device archetypes
DEVICE_KINDS = ["droop", "vsg", "load"]


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
