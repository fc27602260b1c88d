"""Connectors joining matched particles of adjacent columns.

Coordinates are doubled so the mid-column abscissa k + 1/2 of the
three-link alpha connectors is an integer and intersection tests stay
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from src.correlations.sites import Site
from src.kernel.factors import FactorKind

Point = tuple[int, int]


class ConnectorKind(str, Enum):
    ALPHA_UP = "alpha_up"
    ALPHA_DOWN = "alpha_down"
    BETA_UP = "beta_up"
    BETA_DOWN = "beta_down"

    @classmethod
    def for_factor(cls, kind: FactorKind) -> ConnectorKind:
        lookup = {
            FactorKind.ALPHA_PLUS: cls.ALPHA_UP,
            FactorKind.ALPHA_MINUS: cls.ALPHA_DOWN,
            FactorKind.BETA_PLUS: cls.BETA_UP,
            FactorKind.BETA_MINUS: cls.BETA_DOWN,
        }
        if kind not in lookup:
            raise ValueError(f"{kind.value} columns carry no connectors")
        return lookup[kind]

    @property
    def is_alpha(self) -> bool:
        return self in (ConnectorKind.ALPHA_UP, ConnectorKind.ALPHA_DOWN)


@dataclass(frozen=True)
class Connector:
    """A link from `source` on column k to `target` on column k+1.

    Attributes:
        kind: Shape and direction of the link.
        source: Particle on column k.
        target: Particle on column k+1.
        param: Parameter of the column weight the link crosses.
    """
    kind: ConnectorKind
    source: Site
    target: Site
    param: float

    def __post_init__(self):
        if self.target.sigma != self.source.sigma + 1:
            raise ValueError(f"connector {self.source} -> {self.target} skips a column")
        step = self.target.x - self.source.x
        allowed = {
            ConnectorKind.ALPHA_UP: step >= 0,
            ConnectorKind.ALPHA_DOWN: step <= 0,
            ConnectorKind.BETA_UP: step in (0, 1),
            ConnectorKind.BETA_DOWN: step in (0, -1),
        }[self.kind]
        if not allowed:
            raise ValueError(f"{self.kind.value} connector cannot step by {step}")

    @property
    def step(self) -> int:
        return self.target.x - self.source.x

    @property
    def is_flat(self) -> bool:
        return self.step == 0

    @property
    def action(self) -> float:
        """Contribution of this link to the path action."""
        if self.kind.is_alpha:
            return abs(self.step) * math.log(self.param)
        return 0.0 if self.is_flat else math.log(self.param)

    def points(self) -> tuple[Point, ...]:
        """Polyline vertices in doubled coordinates, repeated points removed."""
        c2, x2, y2 = 2 * self.source.sigma, 2 * self.source.x, 2 * self.target.x
        if self.kind.is_alpha:
            raw = [(c2, x2), (c2 + 1, x2), (c2 + 1, y2), (c2 + 2, y2)]
        else:
            raw = [(c2, x2), (c2 + 2, y2)]
        out = [raw[0]]
        for p in raw[1:]:
            if p != out[-1]:
                out.append(p)
        return tuple(out)

    def segments(self) -> list[tuple[Point, Point]]:
        pts = self.points()
        return list(zip(pts, pts[1:]))

    def intersects(self, other: Connector) -> bool:
        return any(
            segments_intersect(a, b, c, d)
            for a, b in self.segments()
            for c, d in other.segments()
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "source": [self.source.sigma, self.source.x],
            "target": [self.target.sigma, self.target.x],
            "action": self.action,
        }


# ---------------------------------------------------------------------------
# Exact segment intersection
# ---------------------------------------------------------------------------

def _orient(p: Point, q: Point, r: Point) -> int:
    cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (cross > 0) - (cross < 0)


def _within(p: Point, q: Point, r: Point) -> bool:
    """q lies in the bounding box of segment pr."""
    return (min(p[0], r[0]) <= q[0] <= max(p[0], r[0])
            and min(p[1], r[1]) <= q[1] <= max(p[1], r[1]))


def segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """Closed segments p1p2 and p3p4 share at least one point."""
    o1 = _orient(p1, p2, p3)
    o2 = _orient(p1, p2, p4)
    o3 = _orient(p3, p4, p1)
    o4 = _orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _within(p1, p3, p2):
        return True
    if o2 == 0 and _within(p1, p4, p2):
        return True
    if o3 == 0 and _within(p3, p1, p4):
        return True
    if o4 == 0 and _within(p3, p2, p4):
        return True
    return False
