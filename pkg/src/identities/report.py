"""Result record shared by all identity checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from src.kernel.context import KernelContext
from src.kernel.factors import PsiFactor


class WrongFactorKind(ValueError):
    """Raised when a column does not carry the factor an identity needs."""
    pass


class IdentityId(str, Enum):
    LINEAR_ALPHA = "linear_alpha"
    LINEAR_BETA = "linear_beta"
    LINEAR_MINUS = "linear_minus"
    INTERLACING_VANISHING = "interlacing_vanishing"
    GENERAL_INTERLACING = "general_interlacing"
    MOVE = "move"
    MOVE_ENVIRONMENT = "move_environment"
    POSITIVITY = "positivity"


def _to_json(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


@dataclass
class IdentityReport:
    identity_id: IdentityId
    parameters: dict[str, Any]
    lhs: complex | float
    rhs: complex | float
    residual: float
    tolerance: float
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "identity": self.identity_id.value,
            "parameters": self.parameters,
            "lhs": _to_json(self.lhs),
            "rhs": _to_json(self.rhs),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": {k: _to_json(v) for k, v in self.details.items()},
        }


def model_snapshot(ctx: KernelContext, **extra: Any) -> dict[str, Any]:
    """JSON-ready description of the model behind a context."""
    z = ctx.model_z
    return {
        "z": {"modulus": z.modulus, "argument": z.argument},
        "columns": {str(k): v for k, v in ctx.model_sequence.describe().items()},
        **extra,
    }


def single_factor(ctx: KernelContext, k: int, allowed: set) -> PsiFactor:
    """The lone factor of column k, checked against the allowed kinds.

    Raises:
        WrongFactorKind: If column k carries zero, several, or other factors.
    """
    factor = ctx.model_sequence.single_factor(k)
    if factor is None or factor.kind not in allowed:
        names = sorted(kind.value for kind in allowed)
        raise WrongFactorKind(
            f"column {k} must carry exactly one of {names}, "
            f"got {[str(f) for f in ctx.model_sequence.column(k)]}"
        )
    return factor
