"""Path ensembles extracted from window configurations."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import structlog

from src.correlations.sites import Configuration, Site, Window
from src.identities.report import WrongFactorKind
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind, PsiSequence
from src.paths.connectors import Connector, ConnectorKind
from src.paths.interlace import interlace_map

log = structlog.get_logger()

PATH_KINDS = {
    FactorKind.ALPHA_PLUS, FactorKind.ALPHA_MINUS, FactorKind.BETA_PLUS, FactorKind.BETA_MINUS,
}


@dataclass(frozen=True)
class Chain:
    """Maximal run of connected particles, left to right.

    open_start / open_end mark chains cut by the window or by a
    connector whose target could not be determined.
    """
    sites: tuple[Site, ...]
    open_start: bool
    open_end: bool


@dataclass
class PathEnsembleWindow:
    window: Window
    gap_kinds: dict[int, FactorKind]
    connectors: list[Connector] = field(default_factory=list)
    chains: list[Chain] = field(default_factory=list)
    truncated: tuple[Site, ...] = ()

    def gap(self, k: int) -> list[Connector]:
        """Connectors from column k to column k+1."""
        return [c for c in self.connectors if c.source.sigma == k]

    def intersecting_pairs(self) -> list[tuple[Connector, Connector]]:
        out = []
        for k in self.gap_kinds:
            links = self.gap(k)
            for i, a in enumerate(links):
                for b in links[i + 1:]:
                    if a.intersects(b):
                        out.append((a, b))
        return out

    def is_non_intersecting(self) -> bool:
        return not self.intersecting_pairs()

    def interior_connectors(self, margin: int) -> list[Connector]:
        """Connectors whose rows keep `margin` away from the window's row edges."""
        lo, hi = self.window.rows[0] + margin, self.window.rows[1] - margin
        return [c for c in self.connectors
                if lo <= min(c.source.x, c.target.x) and max(c.source.x, c.target.x) <= hi]

    def to_record(self) -> dict:
        return {
            "window": self.window.to_dict(),
            "connectors": [c.to_dict() for c in self.connectors],
            "truncated": [[s.sigma, s.x] for s in self.truncated],
            "total_action": total_action(self),
        }


def _gap_kinds(sequence: PsiSequence, window: Window) -> dict[int, FactorKind]:
    kinds = {}
    for k in list(window.columns())[:-1]:
        factor = sequence.single_factor(k + 1)
        if factor is None or factor.kind not in PATH_KINDS:
            raise WrongFactorKind(
                f"column {k + 1} must carry a single alpha or beta factor for path extraction"
            )
        kinds[k] = factor.kind
    return kinds


def _chains(config: Configuration, connectors: list[Connector]) -> list[Chain]:
    forward = {c.source: c.target for c in connectors}
    targets = set(forward.values())
    first_col, last_col = config.window.cols
    chains = []
    for start in config.particles():
        if start in targets:
            continue
        sites = [start]
        while sites[-1] in forward:
            sites.append(forward[sites[-1]])
        chains.append(Chain(
            sites=tuple(sites),
            open_start=start.sigma != first_col,
            open_end=sites[-1].sigma != last_col,
        ))
    return chains


def extract_paths(config: Configuration, ctx: KernelContext) -> PathEnsembleWindow:
    """Build the connectors and chains of a window configuration.

    Every column to the right of the first must carry a single alpha or
    beta factor in the model.

    Raises:
        InterlacingViolation: If two adjacent columns do not interlace.
        WrongFactorKind: For columns without a single alpha/beta factor.
    """
    window = config.window
    kinds = _gap_kinds(ctx.model_sequence, window)
    connectors: list[Connector] = []
    truncated: list[Site] = []
    for k, kind in kinds.items():
        param = ctx.model_sequence.single_factor(k + 1).param
        matching = interlace_map(config, k, kind)
        link = ConnectorKind.for_factor(kind)
        for x in config.column_particles(k):
            if x in matching:
                connectors.append(Connector(link, Site(k, x), Site(k + 1, matching[x]), param))
            else:
                truncated.append(Site(k, x))
    ensemble = PathEnsembleWindow(
        window=window,
        gap_kinds=kinds,
        connectors=connectors,
        chains=_chains(config, connectors),
        truncated=tuple(truncated),
    )
    if truncated:
        log.debug("paths_truncated", count=len(truncated), window=window.to_dict())
    return ensemble


def total_action(ensemble: PathEnsembleWindow) -> float:
    return sum(c.action for c in ensemble.connectors)


def corner_histogram(ensemble: PathEnsembleWindow) -> dict[int, int]:
    """Path corners per interior column.

    A corner is a particle whose incoming and outgoing connectors step
    by different amounts; only particles with both connectors count.
    """
    incoming = {c.target: c.step for c in ensemble.connectors}
    counts = Counter(
        c.source.sigma for c in ensemble.connectors
        if c.source in incoming and incoming[c.source] != c.step
    )
    first, last = ensemble.window.cols
    return {k: counts.get(k, 0) for k in range(first + 1, last)}


def write_ensembles(path: Path | str, ensembles: Iterable[PathEnsembleWindow]) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for ensemble in ensembles:
            fh.write(json.dumps(ensemble.to_record(), sort_keys=True) + "\n")
            n += 1
    log.info("path_ensembles_written", path=str(path), count=n)
    return n
