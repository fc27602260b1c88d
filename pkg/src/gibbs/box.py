"""Boxes with fixed entrances and exits, and their path tuples.

A box is a rectangle of columns a..b and rows c..d.  Its collar is the
two columns a-1 and b+1 over the same rows; the collar is occupied
exactly at the entrance rows P (left) and the exit rows Q (right).  A
path tuple runs one path from each entrance through every box column to
the matching exit, pairing in increasing row order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import structlog

from src.config import Settings, get_settings
from src.correlations.sites import Configuration, EventSpec, Site, Window
from src.identities.report import WrongFactorKind
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence
from src.paths.connectors import Connector, ConnectorKind
from src.paths.ensemble import PATH_KINDS

log = structlog.get_logger()

Rows = tuple[int, ...]


class BoxTooLarge(ValueError):
    """Raised when a box has more sites than the enumeration cap."""
    pass


@dataclass(frozen=True)
class BoxSpec:
    cols: tuple[int, int]
    rows: tuple[int, int]
    entrances: Rows
    exits: Rows

    def __post_init__(self):
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "entrances", tuple(sorted(self.entrances)))
        object.__setattr__(self, "exits", tuple(sorted(self.exits)))
        Window(cols=self.cols, rows=self.rows)
        if len(self.entrances) != len(self.exits):
            raise ValueError(
                f"{len(self.entrances)} entrances but {len(self.exits)} exits"
            )
        for name, rows in (("entrance", self.entrances), ("exit", self.exits)):
            if len(set(rows)) != len(rows):
                raise ValueError(f"duplicate {name} rows {rows}")
            outside = [r for r in rows if not self.rows[0] <= r <= self.rows[1]]
            if outside:
                raise ValueError(f"{name} rows {outside} outside {self.rows}")

    @property
    def window(self) -> Window:
        return Window(cols=self.cols, rows=self.rows)

    @property
    def collar(self) -> tuple[Window, Window]:
        a, b = self.cols
        return Window((a - 1, a - 1), self.rows), Window((b + 1, b + 1), self.rows)

    def collar_event(self) -> EventSpec:
        left, right = self.collar
        values = {s: int(s.x in self.entrances) for s in left.sites()}
        values.update({s: int(s.x in self.exits) for s in right.sites()})
        return EventSpec.from_values(values)

    def to_dict(self) -> dict:
        return {
            "cols": list(self.cols),
            "rows": list(self.rows),
            "entrances": list(self.entrances),
            "exits": list(self.exits),
        }

    @classmethod
    def from_dict(cls, data: dict) -> BoxSpec:
        try:
            return cls(
                cols=tuple(data["cols"]),
                rows=tuple(data["rows"]),
                entrances=tuple(data["entrances"]),
                exits=tuple(data["exits"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed box spec: {exc}") from exc


def load_box(path: Path | str) -> BoxSpec:
    return BoxSpec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class PathTuple:
    """Occupied rows of every box column, left to right; path i uses entry i."""
    columns: tuple[Rows, ...]

    def paths(self, box: BoxSpec) -> list[Rows]:
        return [
            (box.entrances[i], *(col[i] for col in self.columns), box.exits[i])
            for i in range(len(box.entrances))
        ]

    def configuration(self, box: BoxSpec) -> Configuration:
        a = box.cols[0]
        particles = [Site(a + j, x) for j, col in enumerate(self.columns) for x in col]
        return Configuration.from_particles(box.window, particles)

    def connectors(self, box: BoxSpec, factors: dict[int, PsiFactor]) -> list[Connector]:
        """Every link of the tuple, entrance and exit links included."""
        out = []
        first = box.cols[0] - 1
        for path in self.paths(box):
            for j, (x, y) in enumerate(zip(path, path[1:])):
                k = first + j
                factor = factors[k + 1]
                out.append(Connector(
                    ConnectorKind.for_factor(factor.kind), Site(k, x), Site(k + 1, y), factor.param,
                ))
        return out


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def box_factors(box: BoxSpec, sequence: PsiSequence) -> dict[int, PsiFactor]:
    """The single alpha/beta factor of each column a..b+1."""
    out = {}
    for k in range(box.cols[0], box.cols[1] + 2):
        factor = sequence.single_factor(k)
        if factor is None or factor.kind not in PATH_KINDS:
            raise WrongFactorKind(f"column {k} must carry a single alpha or beta factor")
        out[k] = factor
    return out


def _candidates(x: Rows, i: int, kind: FactorKind, lo: int, hi: int) -> range | tuple[int, ...]:
    xi = x[i]
    if kind is FactorKind.BETA_PLUS:
        return (xi, xi + 1)
    if kind is FactorKind.BETA_MINUS:
        return (xi - 1, xi)
    if kind is FactorKind.ALPHA_PLUS:
        top = x[i + 1] - 1 if i + 1 < len(x) else hi
        return range(xi, top + 1)
    bottom = x[i - 1] + 1 if i > 0 else lo
    return range(bottom, xi + 1)


def successors(x: Rows, kind: FactorKind, rows: tuple[int, int]) -> list[Rows]:
    """Row tuples of the next column reachable from `x` without crossings."""
    lo, hi = rows
    if not x:
        return [()]
    options = [_candidates(x, i, kind, lo, hi) for i in range(len(x))]
    out = []
    for y in itertools.product(*options):
        if all(lo <= v <= hi for v in y) and all(p < q for p, q in zip(y, y[1:])):
            out.append(tuple(y))
    return out


def enumerate_box(box: BoxSpec, sequence: PsiSequence, settings: Settings | None = None) -> list[PathTuple]:
    """All non-intersecting path tuples of a box, in depth-first order.

    Raises:
        BoxTooLarge: Above settings.box_site_cap sites.
        WrongFactorKind: If a column a..b+1 lacks a single alpha/beta factor.
    """
    settings = settings or get_settings()
    if box.window.size > settings.box_site_cap:
        raise BoxTooLarge(f"box has {box.window.size} sites, cap is {settings.box_site_cap}")
    factors = box_factors(box, sequence)
    a, b = box.cols
    found: list[PathTuple] = []

    def walk(k: int, x: Rows, prefix: list[Rows]) -> None:
        if k > b:
            if box.exits in successors(x, factors[b + 1].kind, box.rows):
                found.append(PathTuple(tuple(prefix)))
            return
        for y in successors(x, factors[k].kind, box.rows):
            walk(k + 1, y, prefix + [y])

    walk(a, box.entrances, [])
    log.debug("box_enumerated", box=box.to_dict(), tuples=len(found))
    return found
