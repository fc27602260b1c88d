"""Elementary-move identities on columns (k-1, k, k+1).

With w1 the parameter of psi_k and w2 that of psi_{k+1}, a single
particle of column k moves between rows x0 and x0+1 and

    w1 * Pr(A) = w2 * Pr(B)

for the two patterns of each column-kind pair.  The identity stays true
when any set V of further particle sites is added to both events.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

from src.config import Settings
from src.correlations.events import event_probability
from src.correlations.sites import EventSpec, Site
from src.identities.report import IdentityId, IdentityReport, model_snapshot, single_factor
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind

MOVE_TOLERANCE = 1e-10
ENVIRONMENT_TOLERANCE = 1e-9


class OverlapError(ValueError):
    """Raised when environment sites intersect the move window."""
    pass


class MovePair(str, Enum):
    BETA_BETA = "beta_beta"
    ALPHA_ALPHA = "alpha_alpha"
    BETA_ALPHA = "beta_alpha"
    ALPHA_BETA = "alpha_beta"

    @property
    def kinds(self) -> tuple[FactorKind, FactorKind]:
        first, second = self.value.split("_")
        lookup = {"alpha": FactorKind.ALPHA_PLUS, "beta": FactorKind.BETA_PLUS}
        return lookup[first], lookup[second]


# (column offset from k, row) -> occupation; pattern A then pattern B
_MOVES: dict[MovePair, tuple[dict[tuple[int, int], int], dict[tuple[int, int], int]]] = {
    MovePair.BETA_BETA: (
        {(-1, 0): 1, (0, 0): 1, (0, 1): 0, (1, 1): 1},
        {(-1, 0): 1, (0, 0): 0, (0, 1): 1, (1, 1): 1},
    ),
    MovePair.ALPHA_ALPHA: (
        {(-1, 1): 0, (0, 0): 1, (1, 0): 0},
        {(-1, 1): 0, (0, 1): 1, (1, 0): 0},
    ),
    MovePair.BETA_ALPHA: (
        {(-1, 0): 1, (0, 1): 0, (1, 0): 0},
        {(-1, 0): 1, (0, 1): 1, (1, 0): 0},
    ),
    MovePair.ALPHA_BETA: (
        {(-1, 1): 0, (0, 0): 1, (1, 1): 1},
        {(-1, 1): 0, (0, 0): 0, (1, 1): 1},
    ),
}


def move_window(k: int, x0: int = 0) -> set[Site]:
    """The six sites a move identity at column k may touch."""
    return {Site(k + dc, x0 + r) for dc in (-1, 0, 1) for r in (0, 1)}


def move_events(pair: MovePair, k: int, x0: int = 0) -> tuple[EventSpec, EventSpec]:
    def to_event(pattern: dict[tuple[int, int], int]) -> EventSpec:
        return EventSpec.from_values(
            {Site(k + dc, x0 + r): v for (dc, r), v in pattern.items()}
        )

    a, b = _MOVES[pair]
    return to_event(a), to_event(b)


def _weights(ctx: KernelContext, pair: MovePair, k: int) -> tuple[float, float]:
    first, second = pair.kinds
    w1 = single_factor(ctx, k, {first}).param
    w2 = single_factor(ctx, k + 1, {second}).param
    return w1, w2


def check_move_identity(
    ctx: KernelContext,
    pair: MovePair,
    k: int,
    x0: int = 0,
    settings: Settings | None = None,
    tolerance: float = MOVE_TOLERANCE,
) -> IdentityReport:
    """w1 Pr(A) = w2 Pr(B) for the move of `pair` at column k.

    Raises:
        WrongFactorKind: If columns k, k+1 do not carry the pair's kinds.
    """
    return check_move_in_environment(ctx, pair, k, (), x0, settings, tolerance)


def check_move_in_environment(
    ctx: KernelContext,
    pair: MovePair,
    k: int,
    V: Iterable[Site],
    x0: int = 0,
    settings: Settings | None = None,
    tolerance: float = ENVIRONMENT_TOLERANCE,
) -> IdentityReport:
    """Move identity with the extra particle sites V added to both events.

    Raises:
        OverlapError: If V meets the move window.
        WrongFactorKind: If columns k, k+1 do not carry the pair's kinds.
    """
    V = tuple(V)
    clash = set(V) & move_window(k, x0)
    if clash:
        raise OverlapError(f"environment sites inside the move window: {sorted(clash)}")
    w1, w2 = _weights(ctx, pair, k)
    env = EventSpec(particles=V)
    a, b = move_events(pair, k, x0)
    pa = event_probability(ctx, a.merged(env), settings)
    pb = event_probability(ctx, b.merged(env), settings)
    identity = IdentityId.MOVE_ENVIRONMENT if V else IdentityId.MOVE
    return IdentityReport(
        identity_id=identity,
        parameters=model_snapshot(ctx, pair=pair.value, k=k, x0=x0,
                                  environment=[str(s) for s in V]),
        lhs=w1 * pa,
        rhs=w2 * pb,
        residual=abs(w1 * pa - w2 * pb),
        tolerance=tolerance,
        details={"probability_a": pa, "probability_b": pb},
    )
