"""Column weight functions psi_k(u) as symbolic factor lists.

Each lattice column k carries a finite product of elementary factors:

  alpha_plus   (1 - a u)^-1        alpha_minus  (1 - a / u)^-1
  beta_plus    (1 + b u)           beta_minus   (1 + b / u)
  gamma_plus   exp(g u)            gamma_minus  exp(g / u)

Columns outside the support carry psi_k = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

# |base| below this multiple of machine epsilon counts as sitting on a pole
POLE_EPS_FACTOR = 64.0


class PoleHit(ArithmeticError):
    """Raised when a factor is evaluated at (or numerically at) its pole."""
    pass


class FactorKind(str, Enum):
    ALPHA_PLUS = "alpha_plus"
    ALPHA_MINUS = "alpha_minus"
    BETA_PLUS = "beta_plus"
    BETA_MINUS = "beta_minus"
    GAMMA_PLUS = "gamma_plus"
    GAMMA_MINUS = "gamma_minus"

    @property
    def is_alpha(self) -> bool:
        return self in (FactorKind.ALPHA_PLUS, FactorKind.ALPHA_MINUS)

    @property
    def is_beta(self) -> bool:
        return self in (FactorKind.BETA_PLUS, FactorKind.BETA_MINUS)

    @property
    def is_gamma(self) -> bool:
        return self in (FactorKind.GAMMA_PLUS, FactorKind.GAMMA_MINUS)

    @property
    def is_minus(self) -> bool:
        return self in (FactorKind.ALPHA_MINUS, FactorKind.BETA_MINUS, FactorKind.GAMMA_MINUS)


@dataclass(frozen=True)
class PsiFactor:
    """One elementary factor of a column weight function."""
    kind: FactorKind
    param: float

    def __post_init__(self):
        if not (math.isfinite(self.param) and self.param > 0):
            raise ValueError(f"{self.kind.value} parameter must be positive, got {self.param}")

    def __str__(self) -> str:
        return f"{self.kind.value}({self.param:g})"

    def values(self, u, inverse: bool = False):
        """Evaluate this factor (or its reciprocal) at u, scalar or array.

        Raises:
            PoleHit: If u sits on a pole of the requested power.
        """
        a = self.param
        kind = self.kind
        if kind is FactorKind.GAMMA_PLUS:
            return np.exp(-a * u) if inverse else np.exp(a * u)
        if kind is FactorKind.GAMMA_MINUS:
            return np.exp(-a / u) if inverse else np.exp(a / u)

        if kind is FactorKind.ALPHA_PLUS:
            base, power = 1.0 - a * u, -1
        elif kind is FactorKind.ALPHA_MINUS:
            base, power = 1.0 - a / u, -1
        elif kind is FactorKind.BETA_PLUS:
            base, power = 1.0 + a * u, 1
        else:
            base, power = 1.0 + a / u, 1
        if inverse:
            power = -power
        if power > 0:
            return base
        scale = np.finfo(float).eps * POLE_EPS_FACTOR * np.maximum(1.0, np.abs(base - 1.0))
        if np.any(np.abs(base) <= scale):
            raise PoleHit(f"{self} evaluated at its pole u={u!r}")
        return 1.0 / base

    def poles(self, inverse: bool = False) -> list[complex]:
        """Finite nonzero poles of the factor (or of its reciprocal)."""
        a = self.param
        kind = self.kind
        if kind.is_gamma:
            return []
        if kind is FactorKind.ALPHA_PLUS:
            return [] if inverse else [complex(1.0 / a)]
        if kind is FactorKind.ALPHA_MINUS:
            return [] if inverse else [complex(a)]
        if kind is FactorKind.BETA_PLUS:
            return [complex(-1.0 / a)] if inverse else []
        return [complex(-a)] if inverse else []


def eval_psi(factors: Iterable[PsiFactor], u: complex, inverse: bool = False):
    """Product of the given factors at u (scalar or numpy array).

    Args:
        factors: Factor list of one or several columns.
        u: Nonzero evaluation point(s).
        inverse: Evaluate the reciprocal product instead.

    Returns:
        The product, 1 for an empty list.

    Raises:
        PoleHit: If u lies on a pole of one of the factors.
    """
    if np.any(np.asarray(u) == 0):
        raise PoleHit("psi factors are not evaluated at u=0")
    result = np.ones_like(np.asarray(u, dtype=complex))
    for factor in factors:
        result = result * factor.values(u, inverse=inverse)
    if result.ndim == 0:
        return complex(result)
    return result


@dataclass(frozen=True)
class SpectralParameter:
    """The complex number z with Im z > 0, stored in polar form."""
    modulus: float
    argument: float

    def __post_init__(self):
        if not (math.isfinite(self.modulus) and self.modulus > 0):
            raise ValueError(f"|z| must be positive, got {self.modulus}")
        if not (0.0 < self.argument < math.pi):
            raise ValueError(f"arg z must lie in (0, pi), got {self.argument}")

    @classmethod
    def from_complex(cls, z: complex) -> SpectralParameter:
        return cls(modulus=abs(z), argument=cmath.phase(z))

    @property
    def value(self) -> complex:
        return cmath.rect(self.modulus, self.argument)

    @property
    def density(self) -> float:
        """Particle density of the field, arg z / pi."""
        return self.argument / math.pi


def density(z: SpectralParameter) -> float:
    return z.density


@dataclass
class PsiSequence:
    """Column weight functions over a finite support.

    Attributes:
        factors: Column index -> ordered factor tuple. Columns missing from
            the map carry psi = 1.
    """
    factors: dict[int, tuple[PsiFactor, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.factors = {
            int(k): tuple(fs) for k, fs in sorted(self.factors.items()) if fs
        }

    @classmethod
    def from_mapping(cls, columns: Mapping[int, Iterable[PsiFactor]]) -> PsiSequence:
        return cls(factors={k: tuple(v) for k, v in columns.items()})

    @property
    def support(self) -> tuple[int, int] | None:
        """Inclusive column interval [k_min, k_max], None if psi = 1 everywhere."""
        if not self.factors:
            return None
        keys = list(self.factors)
        return min(keys), max(keys)

    def column(self, k: int) -> tuple[PsiFactor, ...]:
        return self.factors.get(k, ())

    def single_factor(self, k: int) -> PsiFactor | None:
        """The factor of column k when it carries exactly one, else None."""
        fs = self.column(k)
        return fs[0] if len(fs) == 1 else None

    def between(self, lo: int, hi: int) -> list[PsiFactor]:
        """All factors of columns lo+1 .. hi (empty when hi <= lo)."""
        out: list[PsiFactor] = []
        for k, fs in self.factors.items():
            if lo < k <= hi:
                out.extend(fs)
        return out

    def shifted(self, offset: int) -> PsiSequence:
        """The same weights moved `offset` columns to the right."""
        return PsiSequence(factors={k + offset: fs for k, fs in self.factors.items()})

    def describe(self) -> dict[int, list[str]]:
        return {k: [str(f) for f in fs] for k, fs in self.factors.items()}
