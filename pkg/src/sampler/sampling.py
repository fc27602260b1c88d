"""Exact sequential sampling of a window.

Sites are visited in (column, row) order; each is a particle with its
conditional probability given everything drawn so far.  Randomness comes
from PCG64 streams: a sample's SeedSequence spawns one child per window
column, so the uniform used at a site depends only on the seed, the
column and the row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import structlog

from src.config import Settings, get_settings
from src.correlations.sites import Configuration, Window
from src.kernel.context import KernelContext
from src.sampler.state import SamplerState, audit_factorization, conditional_particle_prob

log = structlog.get_logger()


class SiteCapExceeded(ValueError):
    """Raised when a window is larger than the sampler cap."""
    pass


@dataclass(frozen=True)
class Sample:
    configuration: Configuration
    log_probability: float
    clamped: int = 0
    refreshes: int = 0

    def to_record(self) -> dict:
        return {
            "window": self.configuration.window.to_dict(),
            "mask": hex(self.configuration.mask),
            "log_probability": self.log_probability,
        }

    @classmethod
    def from_record(cls, record: dict) -> Sample:
        window = Window.from_dict(record["window"])
        config = Configuration.from_mask(window, int(record["mask"], 16))
        return cls(config, float(record["log_probability"]))


def _seed_sequence(seed: int | np.random.SeedSequence) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def sample_window(
    ctx: KernelContext,
    window: Window,
    seed: int | np.random.SeedSequence,
    settings: Settings | None = None,
) -> Sample:
    """Draw one configuration of `window` from the field.

    Raises:
        SiteCapExceeded: Above settings.sampler_site_cap sites.
        ConditioningOnNullEvent: On numerical breakdown of the chain rule.
    """
    settings = settings or get_settings()
    if window.size > settings.sampler_site_cap:
        raise SiteCapExceeded(
            f"window has {window.size} sites, cap is {settings.sampler_site_cap}"
        )
    streams = [np.random.Generator(np.random.PCG64(child))
               for child in _seed_sequence(seed).spawn(window.width)]

    state = SamplerState(ctx, window.size, settings)
    for col, generator in zip(window.columns(), streams):
        for site in (s for s in window.sites() if s.sigma == col):
            p = conditional_particle_prob(state, site)
            occupation = int(generator.random() < p)
            state.commit(site, occupation)
            if state.size % settings.audit_interval == 0:
                drift = audit_factorization(state)
                if drift > settings.audit_tolerance:
                    log.warning("sampler_drift", visited=state.size, drift=drift)
                    state.refresh()

    config = Configuration(window, tuple(state.occupations))
    if state.clamped:
        log.info("sample_clamped_conditionals", count=state.clamped)
    return Sample(config, state.log_probability, state.clamped, state.refreshes)


def sample_many(
    ctx: KernelContext,
    window: Window,
    seed: int,
    count: int,
    settings: Settings | None = None,
) -> Iterator[Sample]:
    """Independent samples, sample i driven by the i-th spawned child seed."""
    for child in np.random.SeedSequence(int(seed)).spawn(count):
        yield sample_window(ctx, window, child, settings)


# ---------------------------------------------------------------------------
# NDJSON
# ---------------------------------------------------------------------------

def write_samples(path: Path | str, samples: Iterable[Sample]) -> int:
    """Write one JSON record per line; returns the number written."""
    n = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_record(), sort_keys=True) + "\n")
            n += 1
    log.info("samples_written", path=str(path), count=n)
    return n


def read_samples(path: Path | str) -> list[Sample]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [Sample.from_record(json.loads(line)) for line in lines if line.strip()]
