"""Incrementally bordered LU factorization of the complemented matrix.

After m visited sites the state holds P A = L U for the m x m matrix
A = K~ of the visited assignment (rows permuted only by refreshes).
Appending a site s borders A with the column c = K(., s), the row
b = K(s, .) and the corner K(s, s) - [s is a hole]:

    L y = P c,   U^T w = b,   pivot = A_ss - w . y

The pivot with a particle on s is Pr(n_s = 1 | visited); with a hole it
is minus Pr(n_s = 0 | visited).  Each step costs O(m^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import structlog

from src.config import Settings, get_settings
from src.correlations.events import NumericallyIndefinite
from src.correlations.linalg import log_abs_determinant
from src.correlations.sites import Site
from src.kernel.context import KernelContext, eval_kernel

log = structlog.get_logger()

# rows allocated up front; the factorization doubles from here
_INITIAL_STORAGE = 64


class ConditioningOnNullEvent(ArithmeticError):
    """Raised when the drawn history has (numerically) zero probability."""
    pass


@dataclass
class _Border:
    site: Site
    y: np.ndarray
    w: np.ndarray
    corner: complex
    schur: complex


class SamplerState:
    """Visited sites, their occupations and the bordered factorization."""

    def __init__(self, ctx: KernelContext, capacity: int, settings: Settings | None = None):
        self.ctx = ctx
        self.settings = settings or get_settings()
        self.sites: list[Site] = []
        self.occupations: list[int] = []
        self.log_probability = 0.0
        self.clamped = 0
        self.refreshes = 0

        self.capacity = capacity
        self._mapped: list[tuple[int, int]] = []
        initial = min(capacity, _INITIAL_STORAGE)
        self._lu = np.zeros((initial, initial), dtype=complex)
        self._perm = np.zeros(initial, dtype=np.intp)
        self._log_abs_det = 0.0
        self._pending: _Border | None = None

    @property
    def size(self) -> int:
        return len(self.sites)

    def _reserve(self, n: int) -> None:
        """Make room for n visited sites, doubling the storage when full."""
        if n > self.capacity:
            raise ValueError(f"sampler state holds at most {self.capacity} sites")
        held = self._lu.shape[0]
        if n <= held:
            return
        grown = min(self.capacity, max(n, 2 * held))
        lu = np.zeros((grown, grown), dtype=complex)
        lu[:held, :held] = self._lu
        perm = np.zeros(grown, dtype=np.intp)
        perm[:held] = self._perm
        self._lu, self._perm = lu, perm

    # ------------------------------------------------------------------
    # Kernel access
    # ------------------------------------------------------------------

    def _k(self, a: tuple[int, int], b: tuple[int, int]) -> complex:
        return eval_kernel(self.ctx, a[0], a[1], b[0], b[1])

    def _matrix(self) -> np.ndarray:
        """K~ of the visited assignment, rebuilt from kernel values."""
        m = self.size
        out = np.empty((m, m), dtype=complex)
        for i, a in enumerate(self._mapped):
            for j, b in enumerate(self._mapped):
                out[i, j] = self._k(a, b)
            if not self.occupations[i]:
                out[i, i] -= 1.0
        return out

    def _border(self, site: Site) -> _Border:
        if self._pending is not None and self._pending.site == site:
            return self._pending
        if site in self.sites:
            raise ValueError(f"site {site} already visited")
        m = self.size
        mapped = self.ctx.kernel_site(site.sigma, site.x)
        c = np.array([self._k(a, mapped) for a in self._mapped], dtype=complex)
        b = np.array([self._k(mapped, a) for a in self._mapped], dtype=complex)
        corner = self._k(mapped, mapped)
        if m:
            lu = self._lu[:m, :m]
            # L and U share storage: strict lower part and upper part
            y = la.solve_triangular(lu, c[self._perm[:m]], lower=True, unit_diagonal=True)
            w = la.solve_triangular(lu, b, trans="T", lower=False)
            schur = corner - w @ y
        else:
            y = w = np.zeros(0, dtype=complex)
            schur = corner
        self._pending = _Border(site, y, w, corner, schur)
        return self._pending

    # ------------------------------------------------------------------
    # Conditionals
    # ------------------------------------------------------------------

    def _clamp(self, p: float) -> float:
        tol = self.settings.probability_tolerance
        if 0.0 <= p <= 1.0:
            return p
        if -tol <= p < 0.0 or 1.0 < p <= 1.0 + tol:
            self.clamped += 1
            log.debug("conditional_clamped", value=p, visited=self.size)
            return min(max(p, 0.0), 1.0)
        raise NumericallyIndefinite(
            f"conditional probability {p:.3e} outside [0, 1] after {self.size} sites"
        )

    def commit(self, site: Site, occupation: int) -> float:
        """Append a site with the given occupation; returns its conditional probability.

        Raises:
            ConditioningOnNullEvent: If the chosen outcome has conditional
                probability below the null-event threshold.
        """
        border = self._border(site)
        p = self._clamp(border.schur.real)
        chosen = p if occupation else 1.0 - p
        if chosen < self.settings.null_event_threshold:
            raise ConditioningOnNullEvent(
                f"outcome {occupation} at {site} has conditional probability {chosen:.3e}"
            )
        pivot = border.schur if occupation else border.schur - 1.0

        m = self.size
        self._reserve(m + 1)
        self._lu[m, :m] = border.w
        self._lu[:m, m] = border.y
        self._lu[m, m] = pivot
        self._perm[m] = m
        self._log_abs_det += math.log(abs(pivot))
        self.log_probability += math.log(chosen)

        self.sites.append(site)
        self.occupations.append(int(occupation))
        self._mapped.append(self.ctx.kernel_site(site.sigma, site.x))
        self._pending = None
        return chosen

    # ------------------------------------------------------------------
    # Audit
    # ------------------------------------------------------------------

    def refresh(self) -> None:
        """Refactor the visited matrix from scratch with partial pivoting."""
        m = self.size
        if m == 0:
            return
        P, L, U = la.lu(self._matrix())
        self._lu[:m, :m] = np.tril(L, -1) + U
        self._perm[:m] = np.argmax(P, axis=0)
        self._log_abs_det = float(np.sum(np.log(np.abs(np.diag(U)))))
        self._pending = None
        self.refreshes += 1
        log.info("sampler_refactorized", visited=m)


def conditional_particle_prob(state: SamplerState, next_site: Site) -> float:
    """Pr(n_next = 1 | visited assignment) as a bordered determinant ratio."""
    return state._clamp(state._border(next_site).schur.real)


def audit_factorization(state: SamplerState) -> float:
    """Relative deviation between the maintained and a rebuilt det K~."""
    if state.size == 0:
        return 0.0
    logdet, _ = log_abs_determinant(state._matrix())
    if not math.isfinite(logdet):
        return math.inf
    return abs(math.expm1(logdet - state._log_abs_det))
