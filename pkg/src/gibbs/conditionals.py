"""Gibbs and determinantal conditionals on a box, and their comparison."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import structlog

from src.config import Settings, get_settings
from src.correlations.events import event_probability
from src.gibbs.box import BoxSpec, PathTuple, box_factors, enumerate_box
from src.kernel.context import KernelContext

log = structlog.get_logger()

Distribution = dict[PathTuple, float]

GIBBS_TOLERANCE = 1e-6


class EmptyEnsemble(ValueError):
    """Raised when a box admits no path tuple."""
    pass


class NullConditioningEvent(ArithmeticError):
    """Raised when the collar event has (numerically) zero probability."""
    pass


def tuple_action(box: BoxSpec, ctx: KernelContext, path_tuple: PathTuple) -> float:
    factors = box_factors(box, ctx.model_sequence)
    return sum(c.action for c in path_tuple.connectors(box, factors))


def gibbs_conditional(
    box: BoxSpec,
    ctx: KernelContext,
    tuples: list[PathTuple] | None = None,
    settings: Settings | None = None,
) -> Distribution:
    """exp(action) / Z over all path tuples of the box.

    Raises:
        EmptyEnsemble: If the box has no path tuple.
    """
    if tuples is None:
        tuples = enumerate_box(box, ctx.model_sequence, settings)
    if not tuples:
        raise EmptyEnsemble(f"no path tuple joins {box.entrances} to {box.exits}")
    actions = np.array([tuple_action(box, ctx, t) for t in tuples])
    weights = np.exp(actions - actions.max())
    probs = weights / weights.sum()
    log.debug("gibbs_conditional", tuples=len(tuples),
              log_partition=float(actions.max() + np.log(weights.sum())))
    return dict(zip(tuples, probs.tolist()))


def determinantal_conditional(
    box: BoxSpec,
    ctx: KernelContext,
    tuples: list[PathTuple] | None = None,
    settings: Settings | None = None,
) -> Distribution:
    """Field probabilities of each tuple given the collar, renormalized.

    Raises:
        EmptyEnsemble: If the box has no path tuple.
        NullConditioningEvent: If the collar event is below the threshold.
    """
    settings = settings or get_settings()
    if tuples is None:
        tuples = enumerate_box(box, ctx.model_sequence, settings)
    if not tuples:
        raise EmptyEnsemble(f"no path tuple joins {box.entrances} to {box.exits}")
    collar = box.collar_event()
    p_collar = event_probability(ctx, collar, settings)
    if p_collar < settings.collar_null_threshold:
        raise NullConditioningEvent(f"collar probability {p_collar:.3e}")
    joint = np.array([
        event_probability(ctx, t.configuration(box).to_event().merged(collar), settings)
        for t in tuples
    ])
    conditional = joint / p_collar
    covered = float(conditional.sum())
    if covered <= 0.0:
        raise NullConditioningEvent("every path tuple has zero probability given the collar")
    log.debug("determinantal_conditional", tuples=len(tuples), covered=covered)
    return dict(zip(tuples, (conditional / covered).tolist()))


def total_variation(p: Distribution, q: Distribution) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# Move graph
# ---------------------------------------------------------------------------

def _one_move_apart(a: PathTuple, b: PathTuple) -> bool:
    diffs = [
        (x - y)
        for col_a, col_b in zip(a.columns, b.columns)
        for x, y in zip(col_a, col_b)
        if x != y
    ]
    return len(diffs) == 1 and abs(diffs[0]) == 1


def move_graph_connected(tuples: list[PathTuple]) -> bool:
    """Tuples form one component when a single vertex shift by one row is an edge."""
    if len(tuples) <= 1:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j, other in enumerate(tuples):
            if j not in seen and _one_move_apart(tuples[i], other):
                seen.add(j)
                queue.append(j)
    return len(seen) == len(tuples)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class GibbsCheck:
    box: BoxSpec
    tuples: int
    total_variation: float
    move_graph_connected: bool
    gibbs: Distribution
    determinantal: Distribution
    tolerance: float = GIBBS_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.total_variation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "box": self.box.to_dict(),
            "tuples": self.tuples,
            "total_variation": self.total_variation,
            "move_graph_connected": self.move_graph_connected,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "distribution": [
                {
                    "columns": [list(col) for col in t.columns],
                    "gibbs": self.gibbs[t],
                    "determinantal": self.determinantal[t],
                }
                for t in self.gibbs
            ],
        }


def check_box(box: BoxSpec, ctx: KernelContext, settings: Settings | None = None) -> GibbsCheck:
    """Compare both conditionals on one box."""
    settings = settings or get_settings()
    tuples = enumerate_box(box, ctx.model_sequence, settings)
    gibbs = gibbs_conditional(box, ctx, tuples, settings)
    det = determinantal_conditional(box, ctx, tuples, settings)
    tv = total_variation(gibbs, det)
    if tv > GIBBS_TOLERANCE:
        log.warning("gibbs_mismatch", box=box.to_dict(), total_variation=tv)
    return GibbsCheck(box, len(tuples), tv, move_graph_connected(tuples), gibbs, det)
