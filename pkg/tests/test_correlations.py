"""Tests for event probabilities, correlation functions and window distributions."""

import math

import numpy as np
import pytest
from structlog.testing import capture_logs

from src.config import Settings
from src.correlations.events import (
    WindowTooLarge,
    build_event_matrix,
    correlation_function,
    event_probability,
    window_distribution,
)
from src.correlations.sites import (
    Configuration,
    EventSpec,
    InvalidEvent,
    Site,
    Window,
    parse_range,
    parse_sites,
)
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def mixed_ctx(settings):
    seq = PsiSequence.from_mapping({
        1: [PsiFactor(FactorKind.BETA_PLUS, 0.5)],
        2: [PsiFactor(FactorKind.ALPHA_PLUS, 0.4)],
    })
    return KernelContext.from_model(seq, SpectralParameter(1.0, 0.45 * math.pi), settings)


def equal_time_ctx(phi: float) -> KernelContext:
    return KernelContext(PsiSequence(), SpectralParameter(1.0, phi))


# ---------------------------------------------------------------------------
# Sites and parsing
# ---------------------------------------------------------------------------

def test_parse_sites():
    assert parse_sites("(0,0), (1,-2)") == [Site(0, 0), Site(1, -2)]
    assert parse_sites("  ") == []
    with pytest.raises(ValueError):
        parse_sites("(0,0) junk")
    with pytest.raises(ValueError):
        parse_sites("0,0")


def test_parse_range():
    assert parse_range("-3:3") == (-3, 3)
    assert parse_range("2:2") == (2, 2)
    with pytest.raises(ValueError):
        parse_range("3:1")
    with pytest.raises(ValueError):
        parse_range("a:b")


def test_window_order_and_index():
    w = Window(cols=(0, 1), rows=(2, 4))
    sites = w.sites()
    assert sites[0] == Site(0, 2)
    assert sites[3] == Site(1, 2)
    assert all(w.index(s) == i for i, s in enumerate(sites))
    assert Site(1, 5) not in w
    with pytest.raises(ValueError):
        Window(cols=(1, 0), rows=(0, 0))


def test_invalid_events():
    s = Site(0, 0)
    with pytest.raises(InvalidEvent):
        EventSpec(particles=(s,), holes=(s,))
    with pytest.raises(InvalidEvent):
        EventSpec(particles=(s, s))
    with pytest.raises(InvalidEvent):
        EventSpec(holes=(s, s))


def test_configuration_mask_round_trip():
    w = Window(cols=(0, 1), rows=(0, 1))
    config = Configuration.from_particles(w, [Site(0, 1), Site(1, 0)])
    assert config.values == (0, 1, 1, 0)
    assert Configuration.from_mask(w, config.mask) == config
    assert config.column_particles(0) == [1]
    assert config.to_event() == EventSpec(particles=(Site(0, 1), Site(1, 0)),
                                          holes=(Site(0, 0), Site(1, 1)))
    with pytest.raises(ValueError):
        Configuration.from_particles(w, [Site(2, 0)])


# ---------------------------------------------------------------------------
# Event probabilities
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("phi", [math.pi / 6, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
def test_single_site_density(phi, settings):
    ctx = equal_time_ctx(phi)
    p = event_probability(ctx, EventSpec(particles=(Site(0, 7),)), settings)
    assert p == pytest.approx(phi / math.pi, abs=1e-10)


def test_empty_event_has_probability_one(mixed_ctx, settings):
    assert event_probability(mixed_ctx, EventSpec(), settings) == pytest.approx(1.0)


def test_hole_is_complement_of_particle(mixed_ctx, settings):
    site = Site(1, 2)
    p = event_probability(mixed_ctx, EventSpec(particles=(site,)), settings)
    q = event_probability(mixed_ctx, EventSpec(holes=(site,)), settings)
    assert p + q == pytest.approx(1.0, abs=1e-10)


def test_complementation_sums_over_one_site(mixed_ctx, settings):
    base = EventSpec(particles=(Site(0, 0),), holes=(Site(2, 1),))
    extra = Site(1, 1)
    total = event_probability(mixed_ctx, base, settings)
    with_particle = event_probability(mixed_ctx, base.merged(EventSpec(particles=(extra,))), settings)
    with_hole = event_probability(mixed_ctx, base.merged(EventSpec(holes=(extra,))), settings)
    assert with_particle + with_hole == pytest.approx(total, abs=1e-10)


def test_two_point_correlation_equal_time(settings):
    phi = 0.3 * math.pi
    ctx = equal_time_ctx(phi)
    rho = correlation_function(ctx, [Site(0, 1), Site(0, 0)])
    assert rho == pytest.approx((phi / math.pi) ** 2 - (math.sin(phi) / math.pi) ** 2, abs=1e-10)


def test_correlation_sites_must_be_distinct():
    ctx = equal_time_ctx(1.0)
    with pytest.raises(ValueError):
        correlation_function(ctx, [Site(0, 0), Site(0, 0)])


def test_event_matrix_is_ordered_and_complemented(mixed_ctx):
    ev = EventSpec(particles=(Site(1, 0),), holes=(Site(0, 3),))
    matrix, sign = build_event_matrix(mixed_ctx, ev)
    assert sign == -1
    # (0, 3) sorts first and is a hole
    density = mixed_ctx.original_kernel(0, 3, 0, 3)
    assert matrix[0, 0] == pytest.approx(density - 1.0)


def test_probability_is_order_independent(mixed_ctx, settings):
    a = EventSpec(particles=(Site(2, 0), Site(0, 1)), holes=(Site(1, 1),))
    b = EventSpec(particles=(Site(0, 1), Site(2, 0)), holes=(Site(1, 1),))
    assert event_probability(mixed_ctx, a, settings) == event_probability(mixed_ctx, b, settings)


# ---------------------------------------------------------------------------
# Window distributions
# ---------------------------------------------------------------------------

def test_window_distribution_is_probability_vector(mixed_ctx, settings):
    dist = window_distribution(mixed_ctx, Window(cols=(0, 2), rows=(0, 2)), settings)
    assert len(dist.probabilities) == 512
    assert dist.total == pytest.approx(1.0, abs=1e-9)
    assert dist.minimum > -1e-10


def test_window_distribution_matches_event_probability(mixed_ctx, settings):
    window = Window(cols=(1, 2), rows=(0, 1))
    dist = window_distribution(mixed_ctx, window, settings)
    for mask in (0, 5, 9, 15):
        config = Configuration.from_mask(window, mask)
        assert dist[config] == pytest.approx(
            event_probability(mixed_ctx, config.to_event(), settings), abs=1e-12
        )


def test_marginal_of_window_distribution(mixed_ctx, settings):
    big = window_distribution(mixed_ctx, Window(cols=(0, 2), rows=(0, 1)), settings)
    sub = Window(cols=(1, 1), rows=(0, 1))
    direct = window_distribution(mixed_ctx, sub, settings)
    assert np.max(np.abs(big.marginalize(sub).probabilities - direct.probabilities)) < 1e-9


def test_as_dict_covers_every_configuration(settings):
    ctx = equal_time_ctx(math.pi / 2)
    dist = window_distribution(ctx, Window(cols=(0, 0), rows=(0, 1)), settings)
    table = dist.as_dict()
    assert len(table) == 4
    assert sum(table.values()) == pytest.approx(1.0)


def test_window_too_large(mixed_ctx, settings):
    with pytest.raises(WindowTooLarge):
        window_distribution(mixed_ctx, Window(cols=(0, 2), rows=(0, 6)), settings)


def test_window_distribution_is_clamped(mixed_ctx, settings):
    dist = window_distribution(mixed_ctx, Window(cols=(0, 2), rows=(0, 1)), settings)
    assert dist.minimum >= 0.0
    assert float(np.max(dist.probabilities)) <= 1.0
    assert dist.raw_minimum == pytest.approx(dist.minimum, abs=settings.probability_tolerance)


def test_window_distribution_reports_lu_growth(mixed_ctx):
    with capture_logs() as logs:
        window_distribution(mixed_ctx, Window(cols=(1, 2), rows=(0, 0)), Settings(growth_warning=0.0))
    assert [e for e in logs if e["event"] == "lu_growth_high"]
