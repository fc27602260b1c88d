"""Kernel evaluation context.

K(sigma, x; tau, y) is the contour integral

  sigma <  tau:  plus arc,  (psi_{sigma+1} ... psi_tau)^-1 u^-(x-y+1)
  sigma == tau:  plus arc,  u^-(x-y+1)
  sigma >  tau:  minus arc, psi_{tau+1} ... psi_sigma u^-(x-y+1)

divided by 2 pi i.  Values depend on x - y only and are memoized under
(sigma, tau, x - y).
"""

from __future__ import annotations

import math
import threading

import numpy as np
import structlog

from src.config import Settings, get_settings
from src.kernel.canonical import CanonicalForm, canonicalize, check_pole_clearance
from src.kernel.factors import PoleHit, PsiSequence, SpectralParameter, eval_psi
from src.kernel.quadrature import ArcSign, ContourSpec, QuadratureSpec, integrate_arc

log = structlog.get_logger()


class KernelContext:
    """Spectral parameter, weights, arcs and the kernel value cache.

    A context built with `from_model` evaluates in canonical coordinates
    and keeps the CanonicalForm to translate original sites.
    """

    def __init__(
        self,
        sequence: PsiSequence,
        z: SpectralParameter,
        quadrature: QuadratureSpec | None = None,
        pole_margin: float = 1e-6,
        canonical: CanonicalForm | None = None,
        model: tuple[PsiSequence, SpectralParameter] | None = None,
    ):
        self.sequence = sequence
        self.z = z
        # weights and z as the caller wrote them, before canonicalization
        self.model_sequence, self.model_z = model or (sequence, z)
        self.quadrature = quadrature or QuadratureSpec()
        self.contours = (
            ContourSpec(ArcSign.PLUS, z.modulus, self.quadrature),
            ContourSpec(ArcSign.MINUS, z.modulus, self.quadrature),
        )
        self.canonical = canonical
        self._cache: dict[tuple[int, int, int], complex] = {}
        self._errors: dict[tuple[int, int, int], float] = {}
        self._lock = threading.Lock()

        check_pole_clearance(sequence, z, pole_margin, error=PoleHit)

    @classmethod
    def from_model(
        cls,
        sequence: PsiSequence,
        z: SpectralParameter,
        settings: Settings | None = None,
        quadrature: QuadratureSpec | None = None,
        canonical: bool = True,
    ) -> KernelContext:
        """Build a context for a model, canonicalized unless asked otherwise."""
        settings = settings or get_settings()
        quadrature = quadrature or QuadratureSpec.from_settings(settings)
        if not canonical:
            return cls(sequence, z, quadrature, settings.pole_margin)
        form = canonicalize(sequence, z, settings.max_log_param, settings.pole_margin)
        return cls(
            form.canonical_sequence, form.z, quadrature, settings.pole_margin,
            canonical=form, model=(sequence, z),
        )

    # ------------------------------------------------------------------
    # Coordinates
    # ------------------------------------------------------------------

    def kernel_site(self, sigma: int, x: int) -> tuple[int, int]:
        """Site in evaluation coordinates for an original-model site."""
        if self.canonical is None:
            return sigma, x
        return self.canonical.to_canonical(sigma, x)

    def original_kernel(self, sigma: int, x: int, tau: int, y: int) -> complex:
        """Kernel of the original model, prefactors included."""
        if self.canonical is None:
            return eval_kernel(self, sigma, x, tau, y)
        s, xs = self.canonical.to_canonical(sigma, x)
        t, ys = self.canonical.to_canonical(tau, y)
        return self.canonical.kernel_prefactor(sigma, x, tau, y) * eval_kernel(self, s, xs, t, ys)

    # ------------------------------------------------------------------
    # Cache
    # ------------------------------------------------------------------

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    def error_estimate(self, sigma: int, tau: int, d: int) -> float | None:
        return self._errors.get((sigma, tau, d))

    def _lookup(self, key: tuple[int, int, int]) -> complex | None:
        return self._cache.get(key)

    def _store(self, key: tuple[int, int, int], value: complex, error: float) -> complex:
        with self._lock:
            # first writer wins so concurrent readers never see a value change
            existing = self._cache.setdefault(key, value)
            self._errors.setdefault(key, error)
        return existing


def eval_kernel(ctx: KernelContext, sigma: int, x: int, tau: int, y: int) -> complex:
    """K(sigma, x; tau, y) in the context's own coordinates.

    Raises:
        QuadratureDiverged: If the arc integral does not converge.
        PoleHit: If a quadrature node lands on a pole.
    """
    d = x - y
    key = (sigma, tau, d)
    cached = ctx._lookup(key)
    if cached is not None:
        return cached

    plus, minus = ctx.contours
    if sigma < tau:
        factors, inverse, contour = ctx.sequence.between(sigma, tau), True, plus
    elif sigma == tau:
        factors, inverse, contour = [], False, plus
    else:
        factors, inverse, contour = ctx.sequence.between(tau, sigma), False, minus

    power = -(d + 1)

    def integrand(u: np.ndarray) -> np.ndarray:
        return eval_psi(factors, u, inverse=inverse) * u ** power

    value, error = integrate_arc(integrand, contour, ctx.z.argument, oscillation=d)
    log.debug("kernel_cache_miss", sigma=sigma, tau=tau, d=d, error=error)
    return ctx._store(key, value, error)


def equal_time_closed_form(z: SpectralParameter, d: int) -> complex:
    """Equal-column kernel |z|^-d sin(phi d) / (pi d), and phi/pi at d = 0."""
    phi = z.argument
    if d == 0:
        return complex(phi / math.pi)
    return complex(z.modulus ** (-d) * math.sin(phi * d) / (math.pi * d))
