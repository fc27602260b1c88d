"""Lattice sites, rectangular windows, events and configurations."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class InvalidEvent(ValueError):
    """Raised for events with overlapping or duplicated sites."""
    pass


@dataclass(frozen=True, order=True)
class Site:
    """A lattice site: column sigma, row x."""
    sigma: int
    x: int

    def __str__(self) -> str:
        return f"({self.sigma},{self.x})"

    def shifted(self, dsigma: int = 0, dx: int = 0) -> Site:
        return Site(self.sigma + dsigma, self.x + dx)


_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_sites(text: str) -> list[Site]:
    """Parse "(0,0),(0,1)" into sites; an empty string gives no sites."""
    text = text.strip()
    if not text:
        return []
    sites = [Site(int(a), int(b)) for a, b in _PAIR.findall(text)]
    if not sites or _PAIR.sub("", text).strip(" ,"):
        raise ValueError(f"cannot parse site list {text!r}")
    return sites


def parse_range(text: str) -> tuple[int, int]:
    """Parse an inclusive "A:B" range."""
    try:
        a, b = (int(part) for part in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"expected A:B, got {text!r}") from exc
    if b < a:
        raise ValueError(f"empty range {text!r}")
    return a, b


@dataclass(frozen=True)
class Window:
    """Rectangle of sites: inclusive column and row intervals."""
    cols: tuple[int, int]
    rows: tuple[int, int]

    def __post_init__(self):
        if self.cols[1] < self.cols[0] or self.rows[1] < self.rows[0]:
            raise ValueError(f"empty window {self.cols} x {self.rows}")

    @property
    def width(self) -> int:
        return self.cols[1] - self.cols[0] + 1

    @property
    def height(self) -> int:
        return self.rows[1] - self.rows[0] + 1

    @property
    def size(self) -> int:
        return self.width * self.height

    def columns(self) -> range:
        return range(self.cols[0], self.cols[1] + 1)

    def row_range(self) -> range:
        return range(self.rows[0], self.rows[1] + 1)

    def sites(self) -> list[Site]:
        """Sites in (column, row) lexicographic order."""
        return [Site(s, x) for s in self.columns() for x in self.row_range()]

    def index(self, site: Site) -> int:
        return (site.sigma - self.cols[0]) * self.height + (site.x - self.rows[0])

    def __contains__(self, site: Site) -> bool:
        return (self.cols[0] <= site.sigma <= self.cols[1]
                and self.rows[0] <= site.x <= self.rows[1])

    def to_dict(self) -> dict:
        return {"cols": list(self.cols), "rows": list(self.rows)}

    @classmethod
    def from_dict(cls, data: dict) -> Window:
        return cls(cols=tuple(data["cols"]), rows=tuple(data["rows"]))


@dataclass(frozen=True)
class EventSpec:
    """Joint event: listed particles present and listed holes empty."""
    particles: tuple[Site, ...] = ()
    holes: tuple[Site, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        object.__setattr__(self, "holes", tuple(self.holes))
        if len(set(self.particles)) != len(self.particles):
            raise InvalidEvent("duplicate particle site")
        if len(set(self.holes)) != len(self.holes):
            raise InvalidEvent("duplicate hole site")
        both = set(self.particles) & set(self.holes)
        if both:
            raise InvalidEvent(f"sites both particle and hole: {sorted(both)}")

    @property
    def size(self) -> int:
        return len(self.particles) + len(self.holes)

    def ordered(self) -> list[tuple[Site, bool]]:
        """(site, is_hole) pairs in lexicographic site order."""
        items = [(s, False) for s in self.particles] + [(s, True) for s in self.holes]
        return sorted(items, key=lambda item: item[0])

    def merged(self, other: EventSpec) -> EventSpec:
        return EventSpec(self.particles + other.particles, self.holes + other.holes)

    @classmethod
    def from_values(cls, values: dict[Site, int]) -> EventSpec:
        return cls(
            particles=tuple(s for s, v in sorted(values.items()) if v),
            holes=tuple(s for s, v in sorted(values.items()) if not v),
        )


@dataclass(frozen=True)
class Configuration:
    """Occupation numbers on every site of a window.

    `values` follows `window.sites()` order.
    """
    window: Window
    values: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.window.size:
            raise ValueError(
                f"configuration has {len(self.values)} values for {self.window.size} sites"
            )
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("occupation numbers must be 0 or 1")

    @classmethod
    def from_mask(cls, window: Window, mask: int) -> Configuration:
        """Bit i of mask is the occupation of the i-th site in window order."""
        return cls(window, tuple((mask >> i) & 1 for i in range(window.size)))

    @classmethod
    def from_particles(cls, window: Window, particles: Iterable[Site]) -> Configuration:
        occupied = set(particles)
        outside = [s for s in occupied if s not in window]
        if outside:
            raise ValueError(f"particles outside window: {sorted(outside)}")
        return cls(window, tuple(int(s in occupied) for s in window.sites()))

    @property
    def mask(self) -> int:
        return sum(v << i for i, v in enumerate(self.values))

    def __getitem__(self, site: Site) -> int:
        if site not in self.window:
            raise KeyError(site)
        return self.values[self.window.index(site)]

    def items(self) -> Iterator[tuple[Site, int]]:
        return zip(self.window.sites(), self.values)

    def particles(self) -> list[Site]:
        return [s for s, v in self.items() if v]

    def column_particles(self, sigma: int) -> list[int]:
        """Occupied rows of one column, increasing."""
        return [x for x in self.window.row_range() if self[Site(sigma, x)]]

    def to_event(self) -> EventSpec:
        return EventSpec.from_values(dict(self.items()))

    def restrict(self, window: Window) -> Configuration:
        return Configuration(window, tuple(self[s] for s in window.sites()))
