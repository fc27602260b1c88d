"""Randomized identity sweeps behind `gp verify`.

Each sweep draws fresh parameters (alpha, beta in (0.05, 0.95), arg z in
(0.1 pi, 0.9 pi)) and runs every check of the selected suites on small
models built around column 1.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable, Iterable

import numpy as np
import structlog

from src.config import Settings, get_settings
from src.correlations.sites import Site, Window
from src.identities.interlacing import (
    InterlacingCase,
    check_general_interlacing,
    check_interlacing_vanishing,
)
from src.identities.linear import (
    check_linear_relation_alpha,
    check_linear_relation_beta,
    check_linear_relation_minus,
)
from src.identities.moves import MovePair, check_move_identity, check_move_in_environment, move_window
from src.identities.positivity import check_window_positivity
from src.identities.report import IdentityReport
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter

log = structlog.get_logger()

ALPHA_BETA_KINDS = (
    FactorKind.ALPHA_PLUS, FactorKind.BETA_PLUS, FactorKind.ALPHA_MINUS, FactorKind.BETA_MINUS,
)


class Suite(str, Enum):
    LINEAR = "linear"
    INTERLACING = "interlacing"
    MOVES = "moves"
    ENVIRONMENT = "environment"
    POSITIVITY = "positivity"
    ALL = "all"


class _Draw:
    """Parameter source for one sweep."""

    def __init__(self, rng: np.random.Generator, settings: Settings):
        self.rng = rng
        self.settings = settings
        self.z = SpectralParameter(1.0, float(rng.uniform(0.1 * math.pi, 0.9 * math.pi)))

    def param(self) -> float:
        return float(self.rng.uniform(0.05, 0.95))

    def factor(self, kind: FactorKind) -> PsiFactor:
        return PsiFactor(kind, self.param())

    def context(self, columns: dict[int, list[PsiFactor]]) -> KernelContext:
        return KernelContext.from_model(PsiSequence.from_mapping(columns), self.z, self.settings)


def _linear(draw: _Draw) -> Iterable[IdentityReport]:
    checks = {
        FactorKind.ALPHA_PLUS: check_linear_relation_alpha,
        FactorKind.BETA_PLUS: check_linear_relation_beta,
        FactorKind.ALPHA_MINUS: check_linear_relation_minus,
        FactorKind.BETA_MINUS: check_linear_relation_minus,
    }
    for kind, check in checks.items():
        neighbour = draw.factor(ALPHA_BETA_KINDS[draw.rng.integers(0, 2)])
        ctx = draw.context({1: [draw.factor(kind)], 2: [neighbour]})
        tau = int(draw.rng.integers(-1, 4))
        d = int(draw.rng.integers(-3, 4))
        yield check(ctx, 1, tau, d)


def _interlacing(draw: _Draw) -> Iterable[IdentityReport]:
    for kind in ALPHA_BETA_KINDS:
        ctx = draw.context({1: [draw.factor(kind)]})
        cases = ((InterlacingCase.ALPHA_TOP, InterlacingCase.ALPHA_BOTTOM) if kind.is_alpha
                 else (InterlacingCase.BETA_TOP, InterlacingCase.BETA_BOTTOM))
        for case in cases:
            yield check_interlacing_vanishing(ctx, case, 1)
        n = int(draw.rng.integers(2, 7))
        reflected = bool(draw.rng.integers(0, 2))
        yield check_general_interlacing(ctx, 1, n, reflected, settings=draw.settings)


def _pair_context(draw: _Draw, pair: MovePair) -> KernelContext:
    first, second = pair.kinds
    return draw.context({1: [draw.factor(first)], 2: [draw.factor(second)]})


def _moves(draw: _Draw) -> Iterable[IdentityReport]:
    for pair in MovePair:
        yield check_move_identity(_pair_context(draw, pair), pair, 1, settings=draw.settings)


def _environment(draw: _Draw) -> Iterable[IdentityReport]:
    blocked = move_window(1)
    candidates = [Site(s, x) for s in range(-1, 4) for x in range(-2, 4)
                  if Site(s, x) not in blocked]
    for pair in MovePair:
        size = int(draw.rng.integers(1, 3))
        picks = draw.rng.choice(len(candidates), size=size, replace=False)
        V = [candidates[i] for i in sorted(picks)]
        yield check_move_in_environment(
            _pair_context(draw, pair), pair, 1, V, settings=draw.settings
        )


def _positivity(draw: _Draw) -> Iterable[IdentityReport]:
    columns = {
        k: [draw.factor(ALPHA_BETA_KINDS[draw.rng.integers(0, len(ALPHA_BETA_KINDS))])]
        for k in (1, 2)
    }
    if draw.rng.integers(0, 2):
        columns[2].append(PsiFactor(FactorKind.GAMMA_PLUS, draw.param()))
    ctx = draw.context(columns)
    yield check_window_positivity(ctx, Window(cols=(0, 2), rows=(0, 3)), draw.settings)


_SUITES: dict[Suite, Callable[[_Draw], Iterable[IdentityReport]]] = {
    Suite.LINEAR: _linear,
    Suite.INTERLACING: _interlacing,
    Suite.MOVES: _moves,
    Suite.ENVIRONMENT: _environment,
    Suite.POSITIVITY: _positivity,
}


def run_suite(
    suites: Iterable[Suite] = (Suite.ALL,),
    sweeps: int = 10,
    seed: int = 0,
    settings: Settings | None = None,
) -> list[IdentityReport]:
    """Run the selected identity suites over `sweeps` random draws.

    Args:
        suites: Suites to run; Suite.ALL selects every suite.
        sweeps: Number of random parameter draws.
        seed: Seed of the parameter stream.
        settings: Numerical settings, defaults from the environment.

    Returns:
        Every report produced, failures included.
    """
    settings = settings or get_settings()
    selected = list(suites)
    if Suite.ALL in selected:
        selected = [s for s in Suite if s is not Suite.ALL]
    rng = np.random.default_rng(seed)

    reports: list[IdentityReport] = []
    for sweep in range(sweeps):
        draw = _Draw(rng, settings)
        for suite in selected:
            for report in _SUITES[suite](draw):
                if not report.passed:
                    log.warning("identity_failed", suite=suite.value, sweep=sweep,
                                identity=report.identity_id.value, residual=report.residual)
                reports.append(report)
    log.info("identity_suite_done", reports=len(reports),
             failed=sum(not r.passed for r in reports))
    return reports


def run_model_checks(
    ctx: KernelContext,
    suites: Iterable[Suite] = (Suite.ALL,),
    settings: Settings | None = None,
) -> list[IdentityReport]:
    """Run every selected check that applies to the columns of one model."""
    settings = settings or get_settings()
    selected = set(suites)
    if Suite.ALL in selected:
        selected = set(Suite) - {Suite.ALL}
    sequence = ctx.model_sequence
    singles = {k: f for k in sequence.factors
               if (f := sequence.single_factor(k)) is not None and not f.kind.is_gamma}
    linear = {
        FactorKind.ALPHA_PLUS: check_linear_relation_alpha,
        FactorKind.BETA_PLUS: check_linear_relation_beta,
        FactorKind.ALPHA_MINUS: check_linear_relation_minus,
        FactorKind.BETA_MINUS: check_linear_relation_minus,
    }

    reports: list[IdentityReport] = []
    for k, factor in singles.items():
        if Suite.LINEAR in selected:
            reports.extend(linear[factor.kind](ctx, k, tau, d)
                           for tau in (k - 1, k, k + 1) for d in (-1, 0, 2))
        if Suite.INTERLACING in selected:
            cases = ((InterlacingCase.ALPHA_TOP, InterlacingCase.ALPHA_BOTTOM) if factor.kind.is_alpha
                     else (InterlacingCase.BETA_TOP, InterlacingCase.BETA_BOTTOM))
            reports.extend(check_interlacing_vanishing(ctx, case, k) for case in cases)
        nxt = singles.get(k + 1)
        if Suite.MOVES in selected and nxt is not None:
            for pair in MovePair:
                if pair.kinds == (factor.kind, nxt.kind):
                    reports.append(check_move_identity(ctx, pair, k, settings=settings))
    if Suite.POSITIVITY in selected and sequence.support is not None:
        lo, _ = sequence.support
        reports.append(check_window_positivity(ctx, Window(cols=(lo - 1, lo + 1), rows=(0, 3)), settings))

    log.info("model_checks_done", reports=len(reports),
             failed=sum(not r.passed for r in reports))
    return reports


def summarize(reports: list[IdentityReport], seed: int, sweeps: int) -> dict:
    return {
        "seed": seed,
        "sweeps": sweeps,
        "checks": len(reports),
        "failed": sum(not r.passed for r in reports),
        "max_residual": max((r.residual for r in reports), default=0.0),
        "reports": [r.to_dict() for r in reports],
    }
