"""Tests for the bordered-LU sampler state and window sampling."""

import math

import numpy as np
import pytest

from src.config import Settings
from src.correlations.events import event_probability, window_distribution
from src.correlations.sites import EventSpec, Site, Window
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter
from src.paths.ensemble import extract_paths
from src.sampler.sampling import (
    Sample,
    SiteCapExceeded,
    read_samples,
    sample_many,
    sample_window,
    write_samples,
)
from src.sampler.state import (
    ConditioningOnNullEvent,
    SamplerState,
    audit_factorization,
    conditional_particle_prob,
)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def ctx(settings):
    seq = PsiSequence.from_mapping({
        1: [PsiFactor(FactorKind.BETA_PLUS, 0.5)],
        2: [PsiFactor(FactorKind.ALPHA_PLUS, 0.4)],
    })
    return KernelContext.from_model(seq, SpectralParameter(1.0, 0.45 * math.pi), settings)


@pytest.fixture
def window():
    return Window(cols=(0, 2), rows=(0, 1))


def half_filled_ctx() -> KernelContext:
    return KernelContext(PsiSequence(), SpectralParameter(1.0, math.pi / 2))


# ---------------------------------------------------------------------------
# Sampler state
# ---------------------------------------------------------------------------

def test_first_conditional_is_density(settings):
    state = SamplerState(half_filled_ctx(), 4, settings)
    assert conditional_particle_prob(state, Site(0, 0)) == pytest.approx(0.5, abs=1e-12)


def test_conditionals_multiply_to_event_probability(ctx, settings):
    state = SamplerState(ctx, 4, settings)
    values = {Site(0, 0): 1, Site(0, 1): 0, Site(1, 1): 1, Site(2, 0): 0}
    product = 1.0
    for site, v in values.items():
        product *= state.commit(site, v)
    expected = event_probability(ctx, EventSpec.from_values(values), settings)
    assert product == pytest.approx(expected, rel=1e-9)
    assert state.log_probability == pytest.approx(math.log(expected), abs=1e-9)


def test_conditional_given_history_is_a_ratio(ctx, settings):
    state = SamplerState(ctx, 3, settings)
    state.commit(Site(0, 0), 1)
    state.commit(Site(1, 0), 0)
    p = conditional_particle_prob(state, Site(1, 1))
    history = EventSpec(particles=(Site(0, 0),), holes=(Site(1, 0),))
    joint = history.merged(EventSpec(particles=(Site(1, 1),)))
    ratio = event_probability(ctx, joint, settings) / event_probability(ctx, history, settings)
    assert p == pytest.approx(ratio, abs=1e-10)


def test_forbidden_continuation_has_zero_conditional(settings):
    seq = PsiSequence.from_mapping({1: [PsiFactor(FactorKind.BETA_PLUS, 0.6)]})
    ctx = KernelContext.from_model(seq, SpectralParameter(1.0, 0.4 * math.pi), settings)
    state = SamplerState(ctx, 4, settings)
    state.commit(Site(0, 0), 0)
    state.commit(Site(0, 1), 0)
    state.commit(Site(1, 0), 0)
    assert conditional_particle_prob(state, Site(1, 1)) < 1e-9


def test_null_event_raises(settings):
    strict = Settings(null_event_threshold=0.6)
    state = SamplerState(half_filled_ctx(), 2, strict)
    with pytest.raises(ConditioningOnNullEvent):
        state.commit(Site(0, 0), 0)


def test_visited_site_is_rejected(ctx, settings):
    state = SamplerState(ctx, 2, settings)
    state.commit(Site(0, 0), 1)
    with pytest.raises(ValueError):
        conditional_particle_prob(state, Site(0, 0))


def test_audit_and_refresh(ctx, settings):
    state = SamplerState(ctx, 6, settings)
    for site, v in [(Site(0, 0), 1), (Site(0, 1), 0), (Site(1, 0), 0), (Site(1, 1), 1)]:
        state.commit(site, v)
    assert audit_factorization(state) < 1e-10

    before = conditional_particle_prob(state, Site(2, 0))
    state.refresh()
    assert state.refreshes == 1
    assert audit_factorization(state) < 1e-10
    assert conditional_particle_prob(state, Site(2, 0)) == pytest.approx(before, abs=1e-12)

    # the refactorized state keeps bordering correctly
    state.commit(Site(2, 0), 0)
    assert audit_factorization(state) < 1e-10


def test_storage_grows_by_doubling(settings):
    state = SamplerState(half_filled_ctx(), 4096, settings)
    assert state._lu.shape == (64, 64)
    for x in range(70):
        site = Site(0, x)
        state.commit(site, int(conditional_particle_prob(state, site) >= 0.5))
    assert state._lu.shape == (128, 128)
    assert audit_factorization(state) < 1e-8


def test_state_capacity_is_enforced(settings):
    state = SamplerState(half_filled_ctx(), 2, settings)
    state.commit(Site(0, 0), 1)
    state.commit(Site(0, 1), 0)
    with pytest.raises(ValueError):
        state.commit(Site(0, 2), 1)


def test_empty_state_audit(ctx, settings):
    state = SamplerState(ctx, 1, settings)
    assert audit_factorization(state) == 0.0
    state.refresh()
    assert state.refreshes == 0


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_sample_is_deterministic(ctx, window, settings):
    a = sample_window(ctx, window, 7, settings)
    b = sample_window(ctx, window, 7, settings)
    assert a.configuration == b.configuration
    assert a.log_probability == b.log_probability


def test_sample_log_probability_matches_distribution(ctx, window, settings):
    dist = window_distribution(ctx, window, settings)
    for seed in range(5):
        sample = sample_window(ctx, window, seed, settings)
        assert math.exp(sample.log_probability) == pytest.approx(
            dist[sample.configuration], rel=1e-8
        )


def test_forced_refreshes_do_not_change_samples(ctx, window, settings):
    eager = Settings(audit_interval=2, audit_tolerance=-1.0)
    a = sample_window(ctx, window, 3, settings)
    b = sample_window(ctx, window, 3, eager)
    assert b.refreshes == 3
    assert a.configuration == b.configuration
    assert a.log_probability == pytest.approx(b.log_probability, abs=1e-10)


def test_single_site_frequency(settings):
    ctx = half_filled_ctx()
    window = Window(cols=(0, 0), rows=(0, 0))
    hits = sum(s.configuration.values[0] for s in sample_many(ctx, window, 2024, 10_000, settings))
    assert abs(hits / 10_000 - 0.5) < 0.02


def test_empirical_distribution(ctx, window, settings):
    n = 4000
    dist = window_distribution(ctx, window, settings)
    counts = np.zeros(len(dist.probabilities))
    for sample in sample_many(ctx, window, 99, n, settings):
        counts[sample.configuration.mask] += 1
    p = np.clip(dist.probabilities, 0.0, 1.0)
    band = 4.5 * np.sqrt(p * (1 - p) / n) + 2e-3
    assert np.all(np.abs(counts / n - p) <= band)


@pytest.mark.slow
@pytest.mark.parametrize("window", [
    Window(cols=(0, 0), rows=(0, 2)),
    Window(cols=(0, 1), rows=(0, 1)),
    Window(cols=(1, 2), rows=(-1, 0)),
])
def test_sampler_frequencies_within_three_sigma(ctx, settings, window):
    n = 20_000
    dist = window_distribution(ctx, window, settings)
    counts = np.zeros(len(dist.probabilities))
    for sample in sample_many(ctx, window, 31, n, settings):
        counts[sample.configuration.mask] += 1
    p = dist.probabilities
    checked = p >= 0.005
    # 3 sigma binomial band with a 2e-3 floor
    band = 3.0 * np.sqrt(p * (1 - p) / n) + 2e-3
    assert np.all(np.abs(counts / n - p)[checked] <= band[checked])
    assert counts[p < 1e-12].sum() == 0


@pytest.mark.slow
def test_sampled_columns_always_interlace(ctx, settings):
    window = Window(cols=(0, 2), rows=(0, 2))
    for sample in sample_many(ctx, window, 4242, 10_000, settings):
        # raises InterlacingViolation on a forbidden pair of columns
        assert extract_paths(sample.configuration, ctx).is_non_intersecting()


def test_sample_many_uses_spawned_children(ctx, window, settings):
    samples = list(sample_many(ctx, window, 5, 3, settings))
    children = np.random.SeedSequence(5).spawn(3)
    assert len(samples) == 3
    for sample, child in zip(samples, children):
        assert sample.configuration == sample_window(ctx, window, child, settings).configuration


def test_site_cap(ctx, window):
    with pytest.raises(SiteCapExceeded):
        sample_window(ctx, window, 0, Settings(sampler_site_cap=4))


# ---------------------------------------------------------------------------
# NDJSON
# ---------------------------------------------------------------------------

def test_sample_record(ctx, window, settings):
    sample = sample_window(ctx, window, 1, settings)
    record = sample.to_record()
    assert record["window"] == {"cols": [0, 2], "rows": [0, 1]}
    assert record["mask"] == hex(sample.configuration.mask)
    restored = Sample.from_record(record)
    assert restored.configuration == sample.configuration


def test_write_and_read_samples(tmp_path, ctx, window, settings):
    path = tmp_path / "samples.ndjson"
    samples = list(sample_many(ctx, window, 11, 5, settings))
    assert write_samples(path, samples) == 5
    loaded = read_samples(path)
    assert [s.configuration for s in loaded] == [s.configuration for s in samples]
    assert [s.log_probability for s in loaded] == [s.log_probability for s in samples]


def test_sample_files_are_byte_identical(tmp_path, ctx, window, settings):
    a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    write_samples(a, sample_many(ctx, window, 4, 6, settings))
    write_samples(b, sample_many(ctx, window, 4, 6, settings))
    assert a.read_bytes() == b.read_bytes()
