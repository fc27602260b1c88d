"""Application configuration loaded from environment variables."""

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """All numerical knobs for kernel evaluation, sampling and checks."""

    # --- Quadrature ---
    quad_abs_tol: float = Field(
        default=1e-12, gt=0, description="Absolute tolerance of the arc quadrature"
    )
    quad_nodes_per_panel: int = Field(
        default=16, ge=2, description="Gauss-Legendre nodes per panel"
    )
    quad_max_panels: int = Field(
        default=4096, ge=1, description="Adaptive bisection stops at this many panels"
    )
    pole_margin: float = Field(
        default=1e-6, gt=0, description="Minimal distance of an integrand pole from its arc"
    )
    max_log_param: float = Field(
        default=30.0, gt=0, description="Largest admissible |ln p| of a canonical parameter"
    )

    # --- Probabilities ---
    probability_tolerance: float = Field(
        default=1e-8, gt=0, description="Clamp band around [0, 1] for probabilities"
    )
    growth_warning: float = Field(
        default=1e8, description="LU growth factor above which a warning is logged"
    )
    window_site_cap: int = Field(
        default=20, ge=1, description="Maximal window size for exhaustive distributions"
    )

    # --- Sampler ---
    sampler_site_cap: int = Field(default=4096, ge=1)
    audit_interval: int = Field(
        default=64, ge=1, description="Sites between factorization audits"
    )
    audit_tolerance: float = Field(
        default=1e-8, description="Relative drift that triggers a refactorization"
    )
    null_event_threshold: float = Field(
        default=1e-14, description="Conditional probability treated as a null event"
    )

    # --- Gibbs boxes ---
    box_site_cap: int = Field(default=24, ge=1)
    collar_null_threshold: float = Field(default=1e-12)

    # --- CLI ---
    log_level: str = Field(default="WARNING")

    model_config = {"env_prefix": "GP_", "env_file": ".env", "env_file_encoding": "utf-8"}


def get_settings() -> Settings:
    """Create and return a validated Settings instance."""
    return Settings()
