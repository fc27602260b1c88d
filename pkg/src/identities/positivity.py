"""Desk-scale positivity: a window distribution is a probability vector."""

from __future__ import annotations

from src.config import Settings, get_settings
from src.correlations.events import window_distribution
from src.correlations.sites import Window
from src.identities.report import IdentityId, IdentityReport, model_snapshot
from src.kernel.context import KernelContext

NEGATIVITY_TOLERANCE = 1e-9


def check_window_positivity(
    ctx: KernelContext, window: Window, settings: Settings | None = None
) -> IdentityReport:
    """All configuration probabilities are >= 0 and they sum to 1."""
    settings = settings or get_settings()
    dist = window_distribution(ctx, window, settings)
    total = dist.total
    negative = max(0.0, -dist.raw_minimum - NEGATIVITY_TOLERANCE)
    return IdentityReport(
        identity_id=IdentityId.POSITIVITY,
        parameters=model_snapshot(ctx, window=window.to_dict()),
        lhs=total,
        rhs=1.0,
        residual=abs(total - 1.0) + negative,
        tolerance=settings.probability_tolerance,
        details={"minimum": dist.raw_minimum, "configurations": len(dist.probabilities)},
    )
