"""Named example models with geometric weight progressions.

beta:       psi_k     = 1 + kappa e^(k t) u                    (k in range)
alphabeta:  psi_{2k}   = (1 - (kappa e^(k t))^-1 / u)^-1
            psi_{2k+1} = 1 + lambda e^(k t) u                 (k in range)

t is the inverse temperature (`temp_tau`).  With t = 0 the model is
invariant under column shifts; otherwise replacing kappa by kappa e^t
translates the field by one period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import structlog

from src.config import Settings, get_settings
from src.kernel.canonical import canonicalize
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter

log = structlog.get_logger()


class RangeTooWide(ValueError):
    """Raised when a preset's parameters leave the usable numerical range."""
    pass


class PresetName(str, Enum):
    BETA = "beta"
    ALPHA_BETA = "alphabeta"


@dataclass(frozen=True)
class PresetSpec:
    name: PresetName
    kappa: float = 1.0
    lam: float = 1.0
    temp_tau: float = 0.0
    z: SpectralParameter = field(default_factory=lambda: SpectralParameter(1.0, math.pi / 2))

    def __post_init__(self):
        object.__setattr__(self, "name", PresetName(self.name))
        if not (self.kappa > 0 and self.lam > 0):
            raise ValueError("kappa and lambda must be positive")
        if self.temp_tau < 0:
            raise ValueError(f"temp_tau must be >= 0, got {self.temp_tau}")

    @property
    def period(self) -> int:
        """Columns per step of k."""
        return 1 if self.name is PresetName.BETA else 2


def _columns(spec: PresetSpec, k_range: tuple[int, int]) -> dict[int, list[PsiFactor]]:
    lo, hi = k_range
    columns: dict[int, list[PsiFactor]] = {}
    for k in range(lo, hi + 1):
        growth = math.exp(k * spec.temp_tau)
        if spec.name is PresetName.BETA:
            columns[k] = [PsiFactor(FactorKind.BETA_PLUS, spec.kappa * growth)]
        else:
            columns[2 * k] = [PsiFactor(FactorKind.ALPHA_MINUS, 1.0 / (spec.kappa * growth))]
            columns[2 * k + 1] = [PsiFactor(FactorKind.BETA_PLUS, spec.lam * growth)]
    return columns


def instantiate_preset(
    spec: PresetSpec, k_range: tuple[int, int], settings: Settings | None = None
) -> PsiSequence:
    """Concrete weights of a preset over k_range (inclusive).

    Raises:
        RangeTooWide: If a canonical parameter has |ln p| above
            settings.max_log_param.
    """
    settings = settings or get_settings()
    if k_range[1] < k_range[0]:
        raise ValueError(f"empty k range {k_range}")
    sequence = PsiSequence.from_mapping(_columns(spec, k_range))

    log_r = math.log(spec.z.modulus)
    for k, factors in sequence.factors.items():
        for f in factors:
            scaled = math.log(f.param) + (-log_r if f.kind.is_minus else log_r)
            if abs(scaled) > settings.max_log_param:
                raise RangeTooWide(
                    f"column {k}: parameter {f.param:.3e} exceeds exp(+-{settings.max_log_param:g}); "
                    f"narrow the k range or lower temp_tau"
                )
    canonicalize(sequence, spec.z, settings.max_log_param, settings.pole_margin)
    log.debug("preset_instantiated", name=spec.name.value, k_range=list(k_range),
              columns=len(sequence.factors))
    return sequence


def _weight(factor: PsiFactor) -> float:
    # minus kinds enter the moves through their reciprocal parameter
    return 1.0 / factor.param if factor.kind.is_minus else factor.param


def move_ratio(sequence: PsiSequence, k: int) -> float:
    """Elementary-move constant of columns k, k+1: w_{k+1} / w_k.

    Raises:
        ValueError: If either column lacks a single alpha or beta factor.
    """
    pair = [sequence.single_factor(k), sequence.single_factor(k + 1)]
    if any(f is None or f.kind.is_gamma for f in pair):
        raise ValueError(f"columns {k}, {k + 1} need a single alpha or beta factor each")
    return _weight(pair[1]) / _weight(pair[0])
