"""Adaptive Gauss-Legendre quadrature along circular arcs.

The kernel integrals are (1/2 pi i) * integral of g(u) du over an arc of
radius R joining conj(z) to z.  With u = R e^{i theta} this becomes
(1/2 pi) * integral of g(u) u d(theta), integrated panel by panel:

  Plus arc:   theta from -phi to phi, crossing the real axis at +R
  Minus arc:  theta from 2 pi - phi down to phi, crossing at -R

Each panel is compared against its two halves; panels whose estimate
exceeds their share of the tolerance are bisected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
import structlog
from numpy.polynomial.legendre import leggauss

log = structlog.get_logger()


class QuadratureDiverged(ArithmeticError):
    """Raised when adaptive refinement runs out of panels."""
    pass


class ArcSign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class QuadratureSpec:
    max_panels: int = 4096
    abs_tol: float = 1e-12
    nodes_per_panel: int = 16

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.max_panels < 1:
            raise ValueError("max_panels must be at least 1")
        if self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be at least 2")

    @classmethod
    def from_settings(cls, settings) -> QuadratureSpec:
        return cls(
            max_panels=settings.quad_max_panels,
            abs_tol=settings.quad_abs_tol,
            nodes_per_panel=settings.quad_nodes_per_panel,
        )


@dataclass(frozen=True)
class ContourSpec:
    """Circular arc from conj(z) to z through +radius or -radius."""
    sign: ArcSign
    radius: float
    quadrature: QuadratureSpec

    def angle_range(self, phi: float) -> tuple[float, float]:
        """Increasing angle interval swept by the arc."""
        if self.sign is ArcSign.PLUS:
            return -phi, phi
        return phi, 2.0 * math.pi - phi

    @property
    def orientation(self) -> float:
        """+1 when the arc runs with increasing angle, -1 otherwise."""
        return 1.0 if self.sign is ArcSign.PLUS else -1.0

    def distance_to(self, point: complex, phi: float) -> float:
        """Euclidean distance from a point to the arc."""
        lo, hi = self.angle_range(phi)
        theta = math.atan2(point.imag, point.real)
        # bring theta into [lo, lo + 2 pi)
        theta = lo + (theta - lo) % (2.0 * math.pi)
        if theta <= hi:
            return abs(abs(point) - self.radius)
        ends = (self.radius * complex(math.cos(lo), math.sin(lo)),
                self.radius * complex(math.cos(hi), math.sin(hi)))
        return min(abs(point - e) for e in ends)


@lru_cache(maxsize=16)
def _nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


def _panel(f: Callable[[np.ndarray], np.ndarray], radius: float,
           a: float, b: float, n: int) -> complex:
    x, w = _nodes(n)
    half = 0.5 * (b - a)
    theta = a + half * (x + 1.0)
    u = radius * np.exp(1j * theta)
    return complex(half * np.sum(w * f(u) * u))


def integrate_arc(
    f: Callable[[np.ndarray], np.ndarray],
    contour: ContourSpec,
    phi: float,
    oscillation: int = 0,
) -> tuple[complex, float]:
    """Compute (1/2 pi i) * integral of f(u) du over the arc.

    Args:
        f: Vectorized integrand g(u).
        contour: Arc and quadrature settings.
        phi: Argument of z, in (0, pi).
        oscillation: Rough number of angular oscillations (|d| for u^-d
            integrands), used to size the initial panel grid.

    Returns:
        (value, estimated absolute error).

    Raises:
        QuadratureDiverged: If max_panels is reached before abs_tol is met.
    """
    spec = contour.quadrature
    lo, hi = contour.angle_range(phi)
    span = hi - lo
    n = spec.nodes_per_panel
    initial = min(spec.max_panels, max(2, math.ceil(span * (abs(oscillation) + 1) / 4.0)))
    edges = np.linspace(lo, hi, initial + 1)

    stack: list[tuple[float, float, complex]] = []
    for a, b in zip(edges[:-1], edges[1:]):
        stack.append((float(a), float(b), _panel(f, contour.radius, float(a), float(b), n)))

    accepted: list[tuple[float, complex]] = []
    error = 0.0
    panels = initial
    while stack:
        a, b, coarse = stack.pop()
        mid = 0.5 * (a + b)
        left = _panel(f, contour.radius, a, mid, n)
        right = _panel(f, contour.radius, mid, b, n)
        fine = left + right
        estimate = abs(fine - coarse)
        if estimate <= spec.abs_tol * (b - a) / span:
            accepted.append((a, fine))
            error += estimate
            continue
        panels += 1
        if panels > spec.max_panels:
            raise QuadratureDiverged(
                f"no convergence to {spec.abs_tol:g} within {spec.max_panels} panels"
            )
        stack.append((mid, b, right))
        stack.append((a, mid, left))

    if panels > initial:
        log.debug("quadrature_refined", panels=panels, error=error)
    accepted.sort(key=lambda item: item[0])
    parts = np.array([v for _, v in accepted], dtype=complex)
    total = complex(np.sum(parts)) * contour.orientation / (2.0 * math.pi)
    return total, error / (2.0 * math.pi)
