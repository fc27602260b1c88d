"""SVG rendering of path ensembles.

Two modes:

- paths: connectors as polylines over the (column, row) grid, particles
  as dots, particles with an undetermined continuation in red.
- lozenge: beta ensembles only; every flat link, climbing link and hole
  becomes a plaquette, drawn under the shear (s, x) -> (s*sqrt(3)/2, x - s/2)
  that turns them into the three lozenge orientations.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from enum import Enum
from pathlib import Path

from src.kernel.factors import FactorKind
from src.paths.ensemble import PathEnsembleWindow

SVG_NS = "http://www.w3.org/2000/svg"
UNIT = 24.0
MARGIN = 1.0

COLORS = {
    "flat": "#e8c547",
    "climb": "#5c80bc",
    "hole": "#4d5061",
    "path": "#30323d",
    "particle": "#30323d",
    "truncated": "#c0392b",
}


class ModeUnsupported(ValueError):
    """Raised when the ensemble cannot be drawn in the requested mode."""
    pass


class RenderMode(str, Enum):
    PATHS = "paths"
    LOZENGE = "lozenge"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Canvas:
    """Collects shapes in model coordinates and emits a fitted SVG."""

    def __init__(self):
        self.shapes: list[tuple[str, list[tuple[float, float]], dict[str, str]]] = []

    def add(self, tag: str, points: list[tuple[float, float]], **attrs: str) -> None:
        self.shapes.append((tag, points, attrs))

    def to_string(self) -> str:
        pts = [p for _, points, _ in self.shapes for p in points] or [(0.0, 0.0)]
        xs = [p[0] for p in pts]
        ys = [-p[1] for p in pts]
        x0, y0 = min(xs) - MARGIN, min(ys) - MARGIN
        width = max(xs) - min(xs) + 2 * MARGIN
        height = max(ys) - min(ys) + 2 * MARGIN
        root = ET.Element("svg", {
            "xmlns": SVG_NS,
            "viewBox": " ".join(_fmt(v * UNIT) for v in (x0, y0, width, height)),
            "width": _fmt(width * UNIT),
            "height": _fmt(height * UNIT),
        })
        ET.SubElement(root, "rect", {
            "x": _fmt(x0 * UNIT), "y": _fmt(y0 * UNIT),
            "width": _fmt(width * UNIT), "height": _fmt(height * UNIT), "fill": "white",
        })
        for tag, points, attrs in self.shapes:
            if tag == "circle":
                (cx, cy), = points
                ET.SubElement(root, "circle", {
                    "cx": _fmt(cx * UNIT), "cy": _fmt(-cy * UNIT), "r": _fmt(0.15 * UNIT), **attrs,
                })
            else:
                coords = " ".join(f"{_fmt(x * UNIT)},{_fmt(-y * UNIT)}" for x, y in points)
                ET.SubElement(root, tag, {"points": coords, **attrs})
        return ET.tostring(root, encoding="unicode")


def _render_paths(ensemble: PathEnsembleWindow) -> _Canvas:
    canvas = _Canvas()
    for c in ensemble.connectors:
        points = [(a / 2.0, b / 2.0) for a, b in c.points()]
        canvas.add("polyline", points, fill="none", stroke=COLORS["path"],
                   **{"stroke-width": _fmt(0.08 * UNIT)})
    truncated = set(ensemble.truncated)
    for chain in ensemble.chains:
        for site in chain.sites:
            color = COLORS["truncated"] if site in truncated else COLORS["particle"]
            canvas.add("circle", [(float(site.sigma), float(site.x))], fill=color)
    return canvas


def _shear(sigma: float, x: float) -> tuple[float, float]:
    return sigma * math.sqrt(3) / 2, x - sigma / 2


def _render_lozenges(ensemble: PathEnsembleWindow) -> _Canvas:
    kinds = set(ensemble.gap_kinds.values())
    if kinds - {FactorKind.BETA_PLUS, FactorKind.BETA_MINUS}:
        raise ModeUnsupported("lozenge mode needs beta columns only")
    if len(kinds) > 1:
        raise ModeUnsupported("lozenge mode cannot mix beta_plus and beta_minus columns")
    # beta_minus ensembles are drawn with rows reflected
    sign = -1 if FactorKind.BETA_MINUS in kinds else 1

    def tile(corners: list[tuple[float, float]], color: str) -> None:
        canvas.add("polygon", [_shear(s, x) for s, x in corners],
                   fill=color, stroke="white", **{"stroke-width": _fmt(0.03 * UNIT)})

    canvas = _Canvas()
    for c in ensemble.connectors:
        s, x = c.source.sigma, sign * c.source.x
        if c.is_flat:
            tile([(s, x - 0.5), (s + 1, x - 0.5), (s + 1, x + 0.5), (s, x + 0.5)], COLORS["flat"])
        else:
            tile([(s, x - 0.5), (s + 1, x + 0.5), (s + 1, x + 1.5), (s, x + 0.5)], COLORS["climb"])
    particles = {site for chain in ensemble.chains for site in chain.sites}
    for site in ensemble.window.sites():
        if site in particles:
            continue
        s, x = site.sigma, sign * site.x
        tile([(s - 1, x - 0.5), (s, x - 0.5), (s + 1, x + 0.5), (s, x + 0.5)], COLORS["hole"])
    return canvas


def render_svg(ensemble: PathEnsembleWindow, mode: RenderMode | str = RenderMode.PATHS) -> str:
    """Deterministic SVG document for a path ensemble.

    Raises:
        ModeUnsupported: For lozenge mode on alpha columns.
    """
    mode = RenderMode(mode)
    canvas = _render_paths(ensemble) if mode is RenderMode.PATHS else _render_lozenges(ensemble)
    return canvas.to_string()


def write_svg(path: Path | str, ensemble: PathEnsembleWindow, mode: RenderMode | str) -> None:
    Path(path).write_text(render_svg(ensemble, mode), encoding="utf-8")
