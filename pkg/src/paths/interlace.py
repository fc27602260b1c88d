"""Particle matchings between columns k and k+1.

The kind of psi_{k+1} decides which objects interlace:

  alpha_plus   particles; x -> min{y >= x : (k+1, y) occupied}
  alpha_minus  particles; x -> max{y <= x : (k+1, y) occupied}
  beta_plus    holes; a particle stays or climbs by one
  beta_minus   holes; a particle stays or drops by one

Minus kinds are handled by reflecting rows.  Particles whose image
depends on sites outside the window are left out of the map.
"""

from __future__ import annotations

from typing import Callable

from src.correlations.sites import Configuration
from src.kernel.factors import FactorKind

Matching = dict[int, int]


class InterlacingViolation(ValueError):
    """Raised when two adjacent columns do not interlace."""
    pass


def _pairs(rows: list[int]) -> list[tuple[int, int]]:
    return list(zip(rows, rows[1:]))


def _count(rows: list[int], lo: int, hi: int, closed_left: bool) -> int:
    if closed_left:
        return sum(lo <= r < hi for r in rows)
    return sum(lo < r <= hi for r in rows)


def _alpha_up(src: list[int], dst: list[int], rows: list[int], k: int) -> Matching:
    for x1, x2 in _pairs(src):
        n = _count(dst, x1, x2, closed_left=True)
        if n != 1:
            raise InterlacingViolation(
                f"particles {x1},{x2} of column {k} enclose {n} particles of column {k + 1}"
            )
    for y1, y2 in _pairs(dst):
        n = _count(src, y1, y2, closed_left=False)
        if n != 1:
            raise InterlacingViolation(
                f"particles {y1},{y2} of column {k + 1} enclose {n} particles of column {k}"
            )
    out: Matching = {}
    for x in src:
        above = [y for y in dst if y >= x]
        if above:
            out[x] = above[0]
    return out


def _beta_up(src: list[int], dst: list[int], rows: list[int], k: int) -> Matching:
    src_holes = [r for r in rows if r not in set(src)]
    dst_holes = [r for r in rows if r not in set(dst)]
    for y1, y2 in _pairs(dst_holes):
        n = _count(src_holes, y1, y2, closed_left=True)
        if n != 1:
            raise InterlacingViolation(
                f"holes {y1},{y2} of column {k + 1} enclose {n} holes of column {k}"
            )
    out: Matching = {}
    if not src_holes:
        return out
    lowest, highest, top = src_holes[0], src_holes[-1], rows[-1]

    # below the lowest hole: the one hole of column k+1 at or under it, if any
    # is in the window, splits the block; otherwise every particle climbs
    pin = [h for h in dst_holes if h <= lowest]
    for x in range(rows[0], lowest):
        out[x] = x if pin and x < pin[0] else x + 1

    for x1, x2 in _pairs(src_holes):
        inside = [h for h in dst_holes if x1 < h <= x2]
        if len(inside) != 1:
            raise InterlacingViolation(
                f"holes {x1},{x2} of column {k} enclose {len(inside)} holes of column {k + 1}"
            )
        h = inside[0]
        for x in range(x1 + 1, x2):
            out[x] = x if x < h else x + 1

    # above the highest hole a climb past the window top stays undetermined
    pin = [h for h in dst_holes if h > highest]
    for x in range(highest + 1, top + 1):
        if not pin or x < pin[0]:
            out[x] = x
        elif x < top:
            out[x] = x + 1
    return out


def _reflected(
    rule: Callable[[list[int], list[int], list[int], int], Matching],
) -> Callable[[list[int], list[int], list[int], int], Matching]:
    def apply(src: list[int], dst: list[int], rows: list[int], k: int) -> Matching:
        flip = sorted(-r for r in rows)
        image = rule(sorted(-x for x in src), sorted(-y for y in dst), flip, k)
        return {-x: -y for x, y in image.items()}
    return apply


_RULES = {
    FactorKind.ALPHA_PLUS: _alpha_up,
    FactorKind.ALPHA_MINUS: _reflected(_alpha_up),
    FactorKind.BETA_PLUS: _beta_up,
    FactorKind.BETA_MINUS: _reflected(_beta_up),
}


def interlace_map(config: Configuration, k: int, kind: FactorKind) -> Matching:
    """Match the particles of column k to those of column k+1.

    Args:
        config: Window configuration.
        k: Source column; k and k+1 must lie in the window.
        kind: Kind of the factor of psi_{k+1}.

    Returns:
        Source row -> target row for every particle whose image is
        determined inside the window, in increasing source order.

    Raises:
        InterlacingViolation: If the two columns do not interlace.
        ValueError: For gamma kinds or columns outside the window.
    """
    window = config.window
    if k not in window.columns() or k + 1 not in window.columns():
        raise ValueError(f"columns {k}, {k + 1} not both inside {window.cols}")
    if kind not in _RULES:
        raise ValueError(f"{kind.value} columns have no interlacing map")
    rows = list(window.row_range())
    image = _RULES[kind](config.column_particles(k), config.column_particles(k + 1), rows, k)
    return dict(sorted(image.items()))
