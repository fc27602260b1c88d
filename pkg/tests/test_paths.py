"""Tests for interlacing maps, connectors, path ensembles and SVG output."""

import json
import math
import xml.etree.ElementTree as ET
from collections import Counter

import pytest

from src.config import Settings
from src.correlations.events import event_probability
from src.correlations.sites import Configuration, Site, Window
from src.identities.report import WrongFactorKind
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter
from src.paths.connectors import Connector, ConnectorKind, segments_intersect
from src.paths.ensemble import (
    corner_histogram,
    extract_paths,
    total_action,
    write_ensembles,
)
from src.paths.interlace import InterlacingViolation, interlace_map
from src.paths.svg import SVG_NS, ModeUnsupported, RenderMode, render_svg, write_svg
from src.presets.presets import PresetName, PresetSpec, instantiate_preset
from src.sampler.sampling import sample_many

Z = SpectralParameter(1.0, math.pi / 2)


@pytest.fixture
def settings():
    return Settings()


def model_ctx(columns: dict[int, PsiFactor], settings: Settings) -> KernelContext:
    return KernelContext.from_model(PsiSequence.from_mapping(
        {k: [f] for k, f in columns.items()}), Z, settings)


def config_of(cols, rows, particles) -> Configuration:
    window = Window(cols=cols, rows=rows)
    return Configuration.from_particles(window, [Site(s, x) for s, x in particles])


@pytest.fixture
def staircase(settings):
    """Three particles climbing one row per column across a beta_plus strip."""
    ctx = model_ctx({k: PsiFactor(FactorKind.BETA_PLUS, 0.5) for k in (1, 2, 3)}, settings)
    particles = [(c, x) for c in range(4) for x in range(c, c + 3)]
    return config_of((0, 3), (-1, 6), particles), ctx


# ---------------------------------------------------------------------------
# Interlacing maps
# ---------------------------------------------------------------------------

def test_beta_plus_flat_map():
    config = config_of((0, 1), (-1, 2), [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert interlace_map(config, 0, FactorKind.BETA_PLUS) == {0: 0, 1: 1}


def test_beta_plus_climbing_map(staircase):
    config, _ = staircase
    assert interlace_map(config, 0, FactorKind.BETA_PLUS) == {0: 1, 1: 2, 2: 3}


def test_alpha_plus_jump():
    config = config_of((0, 1), (0, 3), [(0, 0), (1, 2)])
    assert interlace_map(config, 0, FactorKind.ALPHA_PLUS) == {0: 2}


def test_alpha_minus_jump():
    config = config_of((0, 1), (0, 3), [(0, 3), (1, 1)])
    assert interlace_map(config, 0, FactorKind.ALPHA_MINUS) == {3: 1}


def test_beta_minus_drop():
    config = config_of((0, 1), (0, 3), [(0, 2), (1, 1)])
    assert interlace_map(config, 0, FactorKind.BETA_MINUS) == {2: 1}


def test_alpha_plus_violation():
    # two particles with nothing between them in the next column
    config = config_of((0, 1), (0, 3), [(0, 0), (0, 1), (1, 2)])
    with pytest.raises(InterlacingViolation):
        interlace_map(config, 0, FactorKind.ALPHA_PLUS)


def test_beta_plus_violation():
    # a particle may not climb by two rows
    config = config_of((0, 1), (0, 3), [(0, 0), (1, 2)])
    with pytest.raises(InterlacingViolation):
        interlace_map(config, 0, FactorKind.BETA_PLUS)


def test_undetermined_image_is_left_out():
    config = config_of((0, 1), (0, 1), [(0, 1)])
    assert interlace_map(config, 0, FactorKind.BETA_PLUS) == {}


def test_block_below_lowest_hole_is_pinned():
    # the hole of column 1 at row 1 splits the block under the hole at row 3
    config = config_of((0, 1), (0, 3), [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (1, 3)])
    assert interlace_map(config, 0, FactorKind.BETA_PLUS) == {0: 0, 1: 2, 2: 3}


def test_block_below_lowest_hole_climbs_without_pin():
    config = config_of((0, 1), (0, 2), [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)])
    assert interlace_map(config, 0, FactorKind.BETA_PLUS) == {0: 1, 1: 2}


def test_block_above_highest_hole():
    pinned = config_of((0, 1), (0, 3), [(0, 1), (0, 2), (0, 3), (1, 1), (1, 3)])
    # row 3 climbs out of the window
    assert interlace_map(pinned, 0, FactorKind.BETA_PLUS) == {1: 1, 2: 3}
    flat = config_of((0, 1), (0, 2), [(0, 1), (0, 2), (1, 1), (1, 2)])
    assert interlace_map(flat, 0, FactorKind.BETA_PLUS) == {1: 1, 2: 2}


def test_beta_minus_edge_blocks():
    # mirror image of the pinned block above
    config = config_of((0, 1), (-3, 0), [(0, -1), (0, -2), (0, -3), (1, -1), (1, -3)])
    assert interlace_map(config, 0, FactorKind.BETA_MINUS) == {-2: -3, -1: -1}


def test_interlace_map_argument_errors():
    config = config_of((0, 1), (0, 1), [])
    with pytest.raises(ValueError):
        interlace_map(config, 1, FactorKind.BETA_PLUS)
    with pytest.raises(ValueError):
        interlace_map(config, 0, FactorKind.GAMMA_PLUS)


# ---------------------------------------------------------------------------
# Connectors
# ---------------------------------------------------------------------------

def test_connector_actions():
    up = Connector(ConnectorKind.ALPHA_UP, Site(0, 0), Site(1, 2), 0.5)
    assert up.action == pytest.approx(2 * math.log(0.5))
    climb = Connector(ConnectorKind.BETA_UP, Site(0, 0), Site(1, 1), 0.5)
    assert climb.action == pytest.approx(math.log(0.5))
    flat = Connector(ConnectorKind.BETA_DOWN, Site(0, 0), Site(1, 0), 0.5)
    assert flat.action == 0.0
    assert flat.is_flat


def test_connector_points_are_doubled():
    up = Connector(ConnectorKind.ALPHA_UP, Site(1, 0), Site(2, 2), 0.5)
    assert up.points() == ((2, 0), (3, 0), (3, 4), (4, 4))
    flat = Connector(ConnectorKind.ALPHA_UP, Site(1, 3), Site(2, 3), 0.5)
    assert flat.points() == ((2, 6), (3, 6), (4, 6))


def test_connector_validation():
    with pytest.raises(ValueError):
        Connector(ConnectorKind.BETA_UP, Site(0, 0), Site(1, 2), 0.5)
    with pytest.raises(ValueError):
        Connector(ConnectorKind.ALPHA_DOWN, Site(0, 0), Site(1, 1), 0.5)
    with pytest.raises(ValueError):
        Connector(ConnectorKind.BETA_UP, Site(0, 0), Site(2, 0), 0.5)
    with pytest.raises(ValueError):
        ConnectorKind.for_factor(FactorKind.GAMMA_MINUS)


def test_connector_intersections():
    long_jump = Connector(ConnectorKind.ALPHA_UP, Site(0, 0), Site(1, 2), 0.5)
    flat = Connector(ConnectorKind.ALPHA_UP, Site(0, 1), Site(1, 1), 0.5)
    above = Connector(ConnectorKind.ALPHA_UP, Site(0, 3), Site(1, 4), 0.5)
    assert long_jump.intersects(flat)
    assert not long_jump.intersects(above)


def test_segments_intersect():
    assert segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
    assert segments_intersect((0, 0), (2, 0), (2, 0), (4, 1))
    assert not segments_intersect((0, 0), (2, 2), (0, 1), (2, 3))
    assert not segments_intersect((0, 0), (1, 0), (2, 0), (3, 0))


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------

def test_staircase_ensemble(staircase):
    config, ctx = staircase
    ensemble = extract_paths(config, ctx)
    assert len(ensemble.connectors) == 9
    assert len(ensemble.chains) == 3
    assert all(len(c.sites) == 4 and not c.open_start and not c.open_end for c in ensemble.chains)
    assert ensemble.truncated == ()
    assert ensemble.is_non_intersecting()
    assert total_action(ensemble) == pytest.approx(9 * math.log(0.5))
    assert corner_histogram(ensemble) == {1: 0, 2: 0}


def test_action_is_additive_over_column_blocks(staircase):
    config, ctx = staircase
    whole = total_action(extract_paths(config, ctx))
    left = config.restrict(Window(cols=(0, 1), rows=(-1, 6)))
    right = config.restrict(Window(cols=(1, 3), rows=(-1, 6)))
    parts = total_action(extract_paths(left, ctx)) + total_action(extract_paths(right, ctx))
    assert parts == pytest.approx(whole)


def test_interior_connectors(staircase):
    config, ctx = staircase
    ensemble = extract_paths(config, ctx)
    assert len(ensemble.interior_connectors(1)) == 9
    assert len(ensemble.interior_connectors(2)) == 7


def test_truncated_particles(settings):
    ctx = model_ctx({1: PsiFactor(FactorKind.BETA_PLUS, 0.5)}, settings)
    ensemble = extract_paths(config_of((0, 1), (0, 1), [(0, 1)]), ctx)
    assert ensemble.truncated == (Site(0, 1),)
    assert ensemble.connectors == []
    (chain,) = ensemble.chains
    assert not chain.open_start
    assert chain.open_end


def test_pinned_edge_block_leaves_only_the_escaping_particle(settings):
    ctx = model_ctx({1: PsiFactor(FactorKind.BETA_PLUS, 0.5)}, settings)
    config = config_of((0, 1), (0, 3), [(0, 1), (0, 2), (0, 3), (1, 1), (1, 3)])
    ensemble = extract_paths(config, ctx)
    assert ensemble.truncated == (Site(0, 3),)
    assert [(c.source.x, c.target.x) for c in ensemble.connectors] == [(1, 1), (2, 3)]


@pytest.fixture
def one_move():
    """Two beta_plus configurations that differ by moving one corner."""
    particles = {
        "flat_first": [(0, 1), (1, 1), (2, 2)],
        "climb_first": [(0, 1), (1, 2), (2, 2)],
    }
    return {name: config_of((0, 2), (0, 3), sites) for name, sites in particles.items()}


def test_corner_histogram_counts_direction_changes(settings, one_move):
    ctx = model_ctx({1: PsiFactor(FactorKind.BETA_PLUS, 0.5), 2: PsiFactor(FactorKind.BETA_PLUS, 0.8)},
                    settings)
    for config in one_move.values():
        assert corner_histogram(extract_paths(config, ctx)) == {1: 1}


def test_action_difference_matches_probability_ratio(settings, one_move):
    ctx = model_ctx({1: PsiFactor(FactorKind.BETA_PLUS, 0.5), 2: PsiFactor(FactorKind.BETA_PLUS, 0.8)},
                    settings)
    a, b = one_move["flat_first"], one_move["climb_first"]
    delta = total_action(extract_paths(a, ctx)) - total_action(extract_paths(b, ctx))
    assert delta == pytest.approx(math.log(0.8 / 0.5))
    ratio = (event_probability(ctx, a.to_event(), settings)
             / event_probability(ctx, b.to_event(), settings))
    assert ratio == pytest.approx(math.exp(delta), rel=1e-6)


@pytest.mark.slow
def test_temperature_preset_corners_sit_near_column_zero(settings):
    spec = PresetSpec(PresetName.BETA, kappa=1.0, temp_tau=2.5)
    ctx = KernelContext.from_model(instantiate_preset(spec, (-3, 2), settings), spec.z, settings)
    window = Window(cols=(-3, 2), rows=(0, 5))
    totals = Counter()
    for sample in sample_many(ctx, window, 5, 200, settings):
        totals.update(corner_histogram(extract_paths(sample.configuration, ctx)))
    # columns -1 and 0 sit between weights below and above one; -2 and 1 are frozen
    assert totals[-1] + totals[0] > 3 * (totals[-2] + totals[1])


def test_extract_paths_needs_path_kinds(settings):
    ctx = model_ctx({1: PsiFactor(FactorKind.GAMMA_PLUS, 1.0)}, settings)
    with pytest.raises(WrongFactorKind):
        extract_paths(config_of((0, 1), (0, 1), []), ctx)


@pytest.mark.parametrize("spec,k_range", [
    (PresetSpec(PresetName.BETA, kappa=1.0), (-1, 4)),
    (PresetSpec(PresetName.ALPHA_BETA, kappa=2.0, lam=1.0), (-2, 2)),
])
def test_sampled_ensembles_do_not_intersect(settings, spec, k_range):
    sequence = instantiate_preset(spec, k_range, settings)
    ctx = KernelContext.from_model(sequence, spec.z, settings)
    window = Window(cols=(0, 3), rows=(0, 3))
    for sample in sample_many(ctx, window, 17, 20, settings):
        ensemble = extract_paths(sample.configuration, ctx)
        assert ensemble.is_non_intersecting()


def test_write_ensembles(tmp_path, staircase):
    config, ctx = staircase
    path = tmp_path / "paths.ndjson"
    assert write_ensembles(path, [extract_paths(config, ctx)] * 2) == 2
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    record = json.loads(lines[0])
    assert record["total_action"] == pytest.approx(9 * math.log(0.5))
    assert len(record["connectors"]) == 9


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def count(svg: str, tag: str) -> int:
    return sum(1 for _ in ET.fromstring(svg).iter(f"{{{SVG_NS}}}{tag}"))


def test_svg_paths_mode(staircase):
    config, ctx = staircase
    svg = render_svg(extract_paths(config, ctx), RenderMode.PATHS)
    assert count(svg, "polyline") == 9
    assert count(svg, "circle") == 12


def test_svg_lozenge_mode(staircase):
    config, ctx = staircase
    svg = render_svg(extract_paths(config, ctx), "lozenge")
    # nine links and twenty holes
    assert count(svg, "polygon") == 29


def test_svg_of_empty_window_is_valid(settings):
    ctx = model_ctx({1: PsiFactor(FactorKind.BETA_PLUS, 0.5)}, settings)
    svg = render_svg(extract_paths(config_of((0, 1), (0, 2), []), ctx))
    root = ET.fromstring(svg)
    assert root.tag == f"{{{SVG_NS}}}svg"
    assert count(svg, "circle") == 0


def test_svg_is_deterministic(tmp_path, staircase):
    config, ctx = staircase
    ensemble = extract_paths(config, ctx)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    write_svg(a, ensemble, RenderMode.LOZENGE)
    write_svg(b, ensemble, RenderMode.LOZENGE)
    assert a.read_bytes() == b.read_bytes()


def test_lozenge_mode_rejects_alpha(settings):
    ctx = model_ctx({1: PsiFactor(FactorKind.ALPHA_PLUS, 0.5)}, settings)
    ensemble = extract_paths(config_of((0, 1), (0, 2), [(0, 0), (1, 1)]), ctx)
    with pytest.raises(ModeUnsupported):
        render_svg(ensemble, RenderMode.LOZENGE)


def test_lozenge_mode_rejects_mixed_beta(settings):
    ctx = model_ctx({
        1: PsiFactor(FactorKind.BETA_PLUS, 0.5),
        2: PsiFactor(FactorKind.BETA_MINUS, 0.5),
    }, settings)
    ensemble = extract_paths(config_of((0, 2), (0, 2), []), ctx)
    with pytest.raises(ModeUnsupported):
        render_svg(ensemble, RenderMode.LOZENGE)
