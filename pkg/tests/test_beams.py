import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bootperc.beams import (
    Beam,
    CoarseGrid,
    al_check,
    beam_count_bound,
    beams_process,
    check_stop_condition,
    closure_2d,
    cluster_of_origin,
    coarse_closure,
    decay_experiment,
    dyadic_scales,
    enumerate_beams_small,
    family_components,
    generate_beam,
    strongly_connected,
)
from bootperc.engine import Box, Configuration, closure, percolates
from bootperc.exceptions import (
    DisconnectedProjectionError,
    InvalidParameterError,
    NotApplicableError,
    WindowTooSmallError,
)
from bootperc.family import NeighborhoodSpec, ThresholdFamily
from bootperc.sampler import BernoulliSeeding, sample_configuration

cells_3d = st.sets(st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(0, 9)), max_size=8)


def bfs_connected(points, reach):
    points = list(points)
    if not points:
        return False
    seen = {points[0]}
    queue = deque([points[0]])
    while queue:
        u = queue.popleft()
        for v in points:
            if v not in seen and max(abs(x - y) for x, y in zip(u, v)) <= reach:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(points)


# ---------------------------------------------------------------------------
# Coarse lattice
# ---------------------------------------------------------------------------

def test_coarse_grid_requires_divisibility():
    with pytest.raises(InvalidParameterError):
        CoarseGrid(3, (8, 9))


def test_coarse_closure_trivial(subcritical_2d):
    box = Box((4, 4))
    assert coarse_closure(subcritical_2d, Configuration.full(box)).is_full()
    assert coarse_closure(subcritical_2d, Configuration.empty(box)).count() == 0


def test_coarse_closure_matches_engine(subcritical_2d):
    grid = CoarseGrid.for_family(subcritical_2d, 18)
    assert grid.block_edge == 3
    rng = np.random.default_rng(4)
    fine = Configuration(Box((18, 18)), rng.random((18, 18)) < 0.6)
    coarse = grid.coarse_seed(fine, threshold=5)
    expected = closure(subcritical_2d, Configuration(Box(grid.dims), coarse.infected.copy()))
    assert coarse_closure(subcritical_2d, coarse) == expected
    assert grid.refine(coarse).box.dims == (18, 18)


# ---------------------------------------------------------------------------
# Strong connectivity
# ---------------------------------------------------------------------------

def test_strong_connectivity_edge():
    assert strongly_connected([(0, 0, 0)], [(4, 0, 0)], 2)
    assert not strongly_connected([(0, 0, 0)], [(5, 0, 0)], 2)


def test_strong_connectivity_empty_second_set():
    assert strongly_connected([(0, 0, 0), (1, 1, 1)], [], 1)
    assert not strongly_connected([(0, 0, 0), (9, 9, 9)], [], 1)
    assert not strongly_connected([], [], 1)


@settings(max_examples=80, deadline=None)
@given(cells_3d, cells_3d, st.integers(1, 3))
def test_strong_connectivity_matches_bfs(S1, S2, c):
    assert strongly_connected(S1, S2, c) == bfs_connected(S1 | S2, 2 * c)


@given(st.sets(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=20), st.sampled_from([(1, 1), (1, 2), (2, 3)]))
def test_family_components_match_bfs(cells, radii):
    offsets = NeighborhoodSpec(radii).vectors()
    expected = []
    remaining = set(cells)
    while remaining:
        start = remaining.pop()
        component, queue = {start}, deque([start])
        while queue:
            x, y = queue.popleft()
            for dx, dy in offsets:
                v = (x + dx, y + dy)
                if v in remaining:
                    remaining.discard(v)
                    component.add(v)
                    queue.append(v)
        expected.append(frozenset(component))
    found = family_components(cells, *radii)
    assert sorted(map(sorted, found)) == sorted(map(sorted, expected))


# ---------------------------------------------------------------------------
# Generated beams
# ---------------------------------------------------------------------------

def test_overlapping_projections_need_no_path():
    beam = generate_beam([(2, 2, 0)], [(2, 2, 5)], 1, 2)
    assert beam.path == ()
    assert beam.cross_section == frozenset({(2, 2)})
    assert (beam.base_level, beam.height) == (0, 6)


def test_path_along_an_axis():
    beam = generate_beam([(0, 0, 0)], [(0, 5, 1)], 1, 2)
    assert beam.path == ((0, 1), (0, 3))
    assert beam.verify(1, 2)
    assert {(0, 0), (0, 5)} <= beam.cross_section


def test_close_projections_are_already_connected():
    beam = generate_beam([(0, 0, 0)], [(0, 2, 0)], 1, 2)
    assert beam.path == ()
    assert beam.cross_section == frozenset({(0, 0), (0, 2)})


def test_disconnected_projection():
    with pytest.raises(DisconnectedProjectionError):
        generate_beam([(0, 0, 0), (5, 5, 0)], [(0, 1, 0)], 1, 2)


def test_closure_2d_fixed_point():
    closed = closure_2d({(0, 0), (1, 0), (0, 1), (3, 3)}, 1, 1)
    assert closure_2d(closed, 1, 1) == closed


def test_beam_cells_and_cover():
    big = Beam(frozenset({(0, 0), (0, 1)}), 0, 3)
    small = Beam(frozenset({(0, 1)}), 1, 1)
    assert big.covers(small)
    assert not small.covers(big)
    assert len(list(big.cells())) == big.volume == 6
    assert big.contains((0, 1, 2))


# ---------------------------------------------------------------------------
# The beams process
# ---------------------------------------------------------------------------

def test_process_single_site(beams_family):
    A = Configuration.from_sites(Box.cube(8, 3), [(3, 3, 3)])
    collection = beams_process(A, beams_family)
    assert len(collection.members) == 1
    assert collection.log == []


def test_process_far_apart_sites(beams_family):
    A = Configuration.from_sites(Box.cube(16, 3), [(0, 0, 0), (8, 8, 8), (0, 15, 15)])
    collection = beams_process(A, beams_family)
    assert len(collection.members) == 3
    assert collection.log == []
    assert check_stop_condition(collection)


def test_process_merges_growing_pair():
    family = ThresholdFamily.of(1, 1, 1, r=2)
    A = Configuration.from_sites(Box.cube(4, 3), [(0, 0, 0), (1, 1, 0)])
    collection = beams_process(A, family)
    assert len(collection.log) == 1
    beam = collection.log[0].beam
    assert beam.cross_section == frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})
    assert (beam.height, beam.scale) == (1, 2)
    assert beam.verify(1, 1)
    assert len(collection.members) == 1
    assert check_stop_condition(collection)


def test_process_requires_r_above_c():
    with pytest.raises(NotApplicableError):
        beams_process(Configuration.empty(Box.cube(4, 3)), ThresholdFamily.of(1, 1, 2, r=2))


def _check_collection(collection, family, A):
    a, b, _ = family.radii
    for record in collection.log:
        assert record.beam.verify(a, b)
    assert len(collection.log) <= max(A.count() - 1, 0)
    assert check_stop_condition(collection)


def test_process_invariants_on_random_samples():
    family = ThresholdFamily.of(1, 1, 1, r=2)
    box = Box.cube(8, 3)
    for trial in range(5):
        A = sample_configuration(box, BernoulliSeeding(0.05, 21, trial))
        collection = beams_process(A, family)
        _check_collection(collection, family, A)
        assert len(collection.members) + len(collection.log) == A.count()


def test_merged_beam_covers_its_parents():
    family = ThresholdFamily.of(1, 1, 1, r=2)
    A = sample_configuration(Box.cube(8, 3), BernoulliSeeding(0.08, 5))
    collection = beams_process(A, family)
    produced = {record.new_id: record.beam for record in collection.log}
    singletons = {i: site for i, site in enumerate(A.sites())}
    for record in collection.log:
        for parent in (record.left, record.right):
            if parent in produced:
                assert record.beam.covers(produced[parent])
            else:
                assert record.beam.contains(singletons[parent])


def test_process_merges_singletons_above_threshold_two(beams_family):
    A = Configuration.from_sites(Box.cube(8, 3), [(0, 0, 0), (2, 0, 0)])
    collection = beams_process(A, beams_family)
    assert len(collection.log) == 1
    beam = collection.log[0].beam
    assert beam.cross_section == frozenset((x, y) for x in range(4) for y in range(2))
    assert (beam.base_level, beam.height, beam.scale) == (0, 1, 2)
    assert beam.verify(1, 1)
    assert check_stop_condition(collection)


def test_covered_site_stays_a_member(beams_family):
    A = Configuration.from_sites(Box.cube(8, 3), [(0, 0, 0), (0, 1, 0), (1, 1, 0)])
    collection = beams_process(A, beams_family)
    assert len(collection.log) == 1
    assert sorted(collection.members) == [2, 3]
    assert collection.members[3].contains((1, 1, 0))
    assert check_stop_condition(collection)


def test_process_on_dense_samples(beams_family):
    box = Box.cube(8, 3)
    for trial in range(3):
        A = sample_configuration(box, BernoulliSeeding(0.5, 77, trial))
        collection = beams_process(A, beams_family)
        assert collection.log
        _check_collection(collection, beams_family, A)
        assert len(collection.members) + len(collection.log) == A.count()
        if collection.percolating:
            report = al_check(collection, dyadic_scales(8))
            assert all(hit.found for hit in report.hits)


@pytest.mark.slow
def test_process_invariants_at_scale(beams_family):
    box = Box.cube(48, 3)
    checked = 0
    for trial in range(100):
        A = sample_configuration(box, BernoulliSeeding(0.3, 77, trial))
        if not percolates(beams_family, A):
            continue
        collection = beams_process(A, beams_family)
        assert collection.log
        _check_collection(collection, beams_family, A)
        checked += 1
        if checked == 50:
            break
    assert checked > 0


# ---------------------------------------------------------------------------
# Scale check
# ---------------------------------------------------------------------------

def test_dyadic_scales():
    assert dyadic_scales(10) == [(1, 1), (2, 2), (4, 4), (8, 8)]


def test_al_check_unit_scale():
    family = ThresholdFamily.of(1, 1, 1, r=2)
    A = Configuration.from_sites(Box.cube(4, 3), [(0, 0, 0), (1, 1, 0)])
    report = al_check(beams_process(A, family), [(1, 1)], lam=4.0)
    assert report.hits[0].found
    assert report.hits[0].area == 4


def test_al_check_non_percolating(beams_family):
    A = Configuration.from_sites(Box.cube(8, 3), [(3, 3, 3)])
    report = al_check(beams_process(A, beams_family), [(16, 16)])
    assert not report.percolating
    assert not report.hits[0].found
    assert report.warnings


# ---------------------------------------------------------------------------
# Beam counting
# ---------------------------------------------------------------------------

def test_count_single_cells():
    assert enumerate_beams_small(1, 3, (4, 5, 6), anchored=True) == 20 * 3
    assert enumerate_beams_small(1, 1, (4, 5, 6)) == 20 * 6


def test_count_dominoes():
    assert enumerate_beams_small(2, 1, (5, 5, 5), anchored=True) == 25 + 40
    assert enumerate_beams_small(2, 1, (5, 5, 5)) == (25 + 40) * 5


def test_count_empty_window():
    assert enumerate_beams_small(3, 3, (0, 5, 5)) == 0


def test_count_intractable():
    with pytest.raises(InvalidParameterError):
        enumerate_beams_small(9, 1, (4, 4, 4))


@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_count_below_bound(h):
    count = enumerate_beams_small(h, 4, (8, 8, 8))
    assert 0 < count <= beam_count_bound(8, h)


def test_polyomino_count():
    # fixed polyominoes of sizes 1..4 placed in a 4x4 window
    assert enumerate_beams_small(4, 1, (4, 4, 1), anchored=True) == 16 + 24 + 52 + 113
    assert beam_count_bound(4, 4) == pytest.approx(4**4 * (3 * math.e) ** 4)


# ---------------------------------------------------------------------------
# Cluster decay
# ---------------------------------------------------------------------------

def test_cluster_empty_when_unseeded(subcritical_2d):
    record = cluster_of_origin(subcritical_2d, 11, BernoulliSeeding(0.0, 1))
    assert record.size == 0
    assert not record.censored


def test_cluster_full_window_censored(subcritical_2d):
    record = cluster_of_origin(subcritical_2d, 5, BernoulliSeeding(1.0, 1))
    assert record.size == 25
    assert record.censored
    assert (0, 0) in record.cluster


def test_cluster_requires_subcritical(square_family):
    with pytest.raises(NotApplicableError):
        cluster_of_origin(square_family, 11, BernoulliSeeding(0.1, 1))


def test_cluster_window_must_be_odd(subcritical_2d):
    with pytest.raises(InvalidParameterError):
        cluster_of_origin(subcritical_2d, 10, BernoulliSeeding(0.1, 1))


def test_decay_heavy_censoring(subcritical_2d):
    with pytest.raises(WindowTooSmallError):
        decay_experiment(subcritical_2d, 0.95, [1, 2], 20, seed=1, window=3)


def test_decay_tail_nonincreasing(subcritical_2d):
    table = decay_experiment(subcritical_2d, 0.05, [0, 1, 2, 3, 5, 8], 400, seed=2, window=41, censor_cap=0.05)
    tails = [row.tail for row in table.rows]
    assert tails[0] == 1.0
    assert all(x >= y for x, y in zip(tails, tails[1:]))
    frame = table.to_frame()
    assert list(frame.columns) == ["n", "tail", "censored_frac", "ci_lo", "ci_hi"]


@pytest.mark.slow
def test_decay_slope_negative(subcritical_2d):
    table = decay_experiment(subcritical_2d, 0.05, list(range(5, 51, 5)), 10_000, seed=3, window=201)
    tails = [row.tail for row in table.rows]
    assert all(x >= y for x, y in zip(tails, tails[1:]))
    assert table.slope < 0
    assert table.censored_fraction < 0.01
