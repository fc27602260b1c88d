"""Event probabilities of the determinantal field.

For particles at t_1..t_m and holes at t_{m+1}..t_n,

    Pr = (-1)^h det K~,   K~_ij = K(t_i, t_j) - [i == j and t_i is a hole],

with h the number of holes.  Sites are ordered (column, row)
lexicographically so every caller builds the same matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import structlog

from src.config import Settings, get_settings
from src.correlations.linalg import lu_determinant
from src.correlations.sites import Configuration, EventSpec, Site, Window
from src.kernel.context import KernelContext, eval_kernel

log = structlog.get_logger()


class NumericallyIndefinite(ArithmeticError):
    """Raised when a computed probability leaves [0, 1] beyond tolerance."""
    pass


class WindowTooLarge(ValueError):
    """Raised when an exhaustive distribution is requested on too many sites."""
    pass


def kernel_matrix(ctx: KernelContext, sites: Iterable[Site]) -> np.ndarray:
    """Matrix K(t_i, t_j) over original-model sites."""
    mapped = [ctx.kernel_site(s.sigma, s.x) for s in sites]
    n = len(mapped)
    out = np.empty((n, n), dtype=complex)
    for i, (si, xi) in enumerate(mapped):
        for j, (sj, xj) in enumerate(mapped):
            out[i, j] = eval_kernel(ctx, si, xi, sj, xj)
    return out


def build_event_matrix(ctx: KernelContext, ev: EventSpec) -> tuple[np.ndarray, int]:
    """Complemented matrix K~ of an event and its sign (-1)^holes.

    Args:
        ctx: Kernel context of the model.
        ev: Particle/hole event.

    Returns:
        (K~ in lexicographic site order, sign).
    """
    ordered = ev.ordered()
    matrix = kernel_matrix(ctx, [s for s, _ in ordered])
    for i, (_, is_hole) in enumerate(ordered):
        if is_hole:
            matrix[i, i] -= 1.0
    sign = -1 if len(ev.holes) % 2 else 1
    return matrix, sign


def _checked(value: complex, tolerance: float, what: str) -> float:
    p = value.real
    if abs(value.imag) > tolerance:
        log.warning("probability_imaginary", what=what, imag=value.imag)
    if p < -tolerance or p > 1.0 + tolerance:
        raise NumericallyIndefinite(f"{what}: probability {p:.3e} outside [0, 1]")
    if p < 0.0 or p > 1.0:
        log.debug("probability_clamped", what=what, value=p)
        p = min(max(p, 0.0), 1.0)
    return p


def event_probability(
    ctx: KernelContext, ev: EventSpec, settings: Settings | None = None
) -> float:
    """Probability of a joint particle/hole event.

    Raises:
        NumericallyIndefinite: If the determinant leaves [0, 1] by more
            than the probability tolerance.
    """
    settings = settings or get_settings()
    matrix, sign = build_event_matrix(ctx, ev)
    det, growth = lu_determinant(matrix)
    if growth > settings.growth_warning:
        log.warning("lu_growth_high", growth=growth, sites=ev.size)
    return _checked(sign * det, settings.probability_tolerance, "event")


def correlation_function(ctx: KernelContext, sites: Iterable[Site]) -> float:
    """n-point correlation rho_n = det K(t_i, t_j) over distinct sites."""
    sites = list(sites)
    if len(set(sites)) != len(sites):
        raise ValueError("correlation sites must be distinct")
    det, _ = lu_determinant(kernel_matrix(ctx, sorted(sites)))
    return det.real


@dataclass
class WindowDistribution:
    """Probabilities of all 2^n configurations of a window, indexed by mask."""
    window: Window
    probabilities: np.ndarray
    # smallest value before clamping; set by window_distribution
    raw_minimum: float | None = None

    @property
    def total(self) -> float:
        return float(np.sum(self.probabilities))

    @property
    def minimum(self) -> float:
        return float(np.min(self.probabilities))

    def __getitem__(self, config: Configuration) -> float:
        return float(self.probabilities[config.mask])

    def as_dict(self) -> dict[Configuration, float]:
        return {
            Configuration.from_mask(self.window, m): float(p)
            for m, p in enumerate(self.probabilities)
        }

    def marginalize(self, window: Window) -> WindowDistribution:
        """Distribution of a sub-window, summing out the other sites."""
        kept = [self.window.index(s) for s in window.sites()]
        out = np.zeros(1 << window.size)
        for mask, p in enumerate(self.probabilities):
            sub = sum(((mask >> i) & 1) << j for j, i in enumerate(kept))
            out[sub] += p
        return WindowDistribution(window, out)


def window_distribution(
    ctx: KernelContext, window: Window, settings: Settings | None = None
) -> WindowDistribution:
    """Exhaustive distribution over every configuration of a small window.

    Each configuration goes through the same pivoted LU, growth check and
    clamping as `event_probability`.

    Raises:
        WindowTooLarge: Above settings.window_site_cap sites.
        NumericallyIndefinite: If any probability leaves [0, 1] beyond tolerance.
    """
    settings = settings or get_settings()
    n = window.size
    if n > settings.window_site_cap:
        raise WindowTooLarge(f"window has {n} sites, cap is {settings.window_site_cap}")

    kernel = kernel_matrix(ctx, window.sites())
    idx = np.arange(n)
    out = np.empty(1 << n)
    worst_growth = 1.0
    raw_minimum = 1.0
    for mask in range(1 << n):
        holes = 1 - ((mask >> idx) & 1)
        matrix = kernel.copy()
        matrix[idx, idx] -= holes
        det, growth = lu_determinant(matrix)
        worst_growth = max(worst_growth, growth)
        value = det if int(holes.sum()) % 2 == 0 else -det
        raw_minimum = min(raw_minimum, value.real)
        out[mask] = _checked(value, settings.probability_tolerance, f"configuration mask {mask}")

    if worst_growth > settings.growth_warning:
        log.warning("lu_growth_high", growth=worst_growth, sites=n)
    log.debug("window_distribution", sites=n, total=float(out.sum()), minimum=float(out.min()))
    return WindowDistribution(window, out, raw_minimum)
