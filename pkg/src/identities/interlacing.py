"""Zero-probability interlacing patterns and the string-sum identities.

Patterns live on columns (k-1, k) and rows (x0, x0+1); psi_k decides which
ones are forbidden.  For plus kinds:

  ALPHA_TOP      particles (k-1, 0), (k-1, 1), hole (k, 0)
  ALPHA_BOTTOM   particles (k, 0), (k, 1), hole (k-1, 1)
  BETA_TOP       holes (k-1, 0), (k-1, 1), particle (k, 1)
  BETA_BOTTOM    particle (k-1, 0), holes (k, 0), (k, 1)

Minus kinds forbid the same patterns reflected in the row direction.
"""

from __future__ import annotations

import itertools
from enum import Enum

import numpy as np

from src.config import Settings
from src.correlations.events import build_event_matrix, event_probability
from src.correlations.linalg import lu_determinant
from src.correlations.sites import EventSpec, Site
from src.identities.report import IdentityId, IdentityReport, model_snapshot, single_factor
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind

VANISHING_TOLERANCE = 1e-10
GENERAL_TOLERANCE = 1e-8
FORBIDDEN_TOLERANCE = 1e-9


class InterlacingCase(str, Enum):
    ALPHA_TOP = "alpha_top"
    ALPHA_BOTTOM = "alpha_bottom"
    BETA_TOP = "beta_top"
    BETA_BOTTOM = "beta_bottom"


# (column offset from k, row) -> occupation, for plus kinds
_PATTERNS: dict[InterlacingCase, dict[tuple[int, int], int]] = {
    InterlacingCase.ALPHA_TOP: {(-1, 0): 1, (-1, 1): 1, (0, 0): 0},
    InterlacingCase.ALPHA_BOTTOM: {(0, 0): 1, (0, 1): 1, (-1, 1): 0},
    InterlacingCase.BETA_TOP: {(-1, 0): 0, (-1, 1): 0, (0, 1): 1},
    InterlacingCase.BETA_BOTTOM: {(-1, 0): 1, (0, 0): 0, (0, 1): 0},
}


def forbidden_pattern(
    case: InterlacingCase, k: int, minus: bool = False, x0: int = 0
) -> EventSpec:
    """The zero-probability event of an interlacing case at column k."""
    values = {}
    for (dc, row), v in _PATTERNS[case].items():
        if minus:
            row = 1 - row
        values[Site(k + dc, x0 + row)] = v
    return EventSpec.from_values(values)


def check_interlacing_vanishing(
    ctx: KernelContext,
    case: InterlacingCase,
    k: int,
    x0: int = 0,
    tolerance: float = VANISHING_TOLERANCE,
) -> IdentityReport:
    """The 3x3 determinant of a forbidden pattern vanishes.

    Raises:
        WrongFactorKind: If column k does not carry the case's factor kind.
    """
    if case in (InterlacingCase.ALPHA_TOP, InterlacingCase.ALPHA_BOTTOM):
        allowed = {FactorKind.ALPHA_PLUS, FactorKind.ALPHA_MINUS}
    else:
        allowed = {FactorKind.BETA_PLUS, FactorKind.BETA_MINUS}
    factor = single_factor(ctx, k, allowed)
    ev = forbidden_pattern(case, k, minus=factor.kind.is_minus, x0=x0)

    matrix, sign = build_event_matrix(ctx, ev)
    det, _ = lu_determinant(matrix)
    scale = max(1.0, float(np.max(np.abs(matrix)))) ** matrix.shape[0]
    return IdentityReport(
        identity_id=IdentityId.INTERLACING_VANISHING,
        parameters=model_snapshot(ctx, case=case.value, k=k, x0=x0, factor=str(factor)),
        lhs=sign * det,
        rhs=0.0,
        residual=abs(det) / scale,
        tolerance=tolerance,
        details={"pattern": {str(s): 1 for s in ev.particles} | {str(s): 0 for s in ev.holes}},
    )


def _string_events(k: int, n: int, kind: FactorKind, reflected: bool, x0: int):
    """Source event and the target column range of a length-n string.

    For alpha the string is two particles around n-2 holes, for beta two
    holes around n-2 particles.  The unreflected string sits on column k-1
    and constrains column k; the reflected one sits on column k and
    constrains column k-1.
    """
    end, inner = (1, 0) if kind.is_alpha else (0, 1)
    rows = list(range(n))
    src_col, dst_col = (k, k - 1) if reflected else (k - 1, k)
    values = {Site(src_col, x0 + r): (end if r in (0, n - 1) else inner) for r in rows}
    # plus kinds: unreflected targets the lower n-1 rows for alpha and the
    # upper n-1 rows for beta; reflection and minus kinds each flip this
    lower = kind.is_alpha
    if reflected:
        lower = not lower
    if kind.is_minus:
        lower = not lower
    target_rows = rows[:-1] if lower else rows[1:]
    target = [Site(dst_col, x0 + r) for r in target_rows]
    return values, target


def check_general_interlacing(
    ctx: KernelContext,
    k: int,
    n: int,
    reflected: bool = False,
    x0: int = 0,
    settings: Settings | None = None,
    tolerance: float = GENERAL_TOLERANCE,
) -> IdentityReport:
    """String-sum identity for strings of length n (2 <= n <= 6).

    For an alpha column, two particles separated by n-2 holes force exactly
    one particle among the n-1 matching sites of the neighbouring column;
    for a beta column two holes around n-2 particles force exactly one
    hole.  The source event probability must equal the sum of the n-1
    exactly-one events, and the event with no match must have probability
    zero.

    Raises:
        WrongFactorKind: If column k is not a single alpha or beta factor.
        ValueError: If n is outside 2..6.
    """
    if not 2 <= n <= 6:
        raise ValueError(f"string length must be in 2..6, got {n}")
    factor = single_factor(ctx, k, {
        FactorKind.ALPHA_PLUS, FactorKind.ALPHA_MINUS,
        FactorKind.BETA_PLUS, FactorKind.BETA_MINUS,
    })
    source, target = _string_events(k, n, factor.kind, reflected, x0)
    match = 1 if factor.kind.is_alpha else 0

    lhs = event_probability(ctx, EventSpec.from_values(source), settings)
    terms = []
    for j in range(len(target)):
        values = dict(source)
        for i, site in enumerate(target):
            values[site] = match if i == j else 1 - match
        terms.append(event_probability(ctx, EventSpec.from_values(values), settings))
    rhs = sum(terms)

    empty = dict(source)
    empty.update({site: 1 - match for site in target})
    no_match = event_probability(ctx, EventSpec.from_values(empty), settings)

    forbidden_excess = max(0.0, no_match - FORBIDDEN_TOLERANCE)
    return IdentityReport(
        identity_id=IdentityId.GENERAL_INTERLACING,
        parameters=model_snapshot(ctx, k=k, n=n, reflected=reflected, x0=x0,
                                  factor=str(factor)),
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs) + forbidden_excess,
        tolerance=tolerance,
        details={"terms": terms, "no_match_probability": no_match},
    )


def enumerate_interlacing_cases() -> list[tuple[InterlacingCase, bool]]:
    """All (case, minus) combinations."""
    return list(itertools.product(InterlacingCase, (False, True)))
