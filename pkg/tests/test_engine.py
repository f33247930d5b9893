import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bootperc.engine import (
    Boundary,
    Box,
    Configuration,
    SubBlock,
    closure,
    closure_with_stats,
    dumps_snapshot,
    ensure_table,
    ensure_volume,
    is_internally_filled,
    loads_snapshot,
    neighbour_table,
    percolates,
    read_snapshot,
    step,
    write_snapshot,
)
from bootperc.exceptions import DimensionMismatchError, InvalidParameterError, OutOfBoundsError, ResourceLimitError
from bootperc.family import ThresholdFamily

FAMILIES = [
    ThresholdFamily.of(1, 1, r=2),
    ThresholdFamily.of(1, 2, r=3),
    ThresholdFamily.of(1, 1, 1, r=2),
    ThresholdFamily.of(1, 1, 1, r=3),
    ThresholdFamily.of(1, 1, 2, r=3),
]


def naive_closure(family, config):
    """Repeated full sweeps; independent of the frontier engine."""
    box = config.box
    offsets = family.neighborhood()
    grid = config.infected.copy()
    while True:
        new = grid.copy()
        for x in np.ndindex(*box.dims):
            if grid[x]:
                continue
            seen = set()
            for v in offsets:
                y = tuple(xi + vi for xi, vi in zip(x, v))
                if box.boundary is Boundary.TORUS:
                    y = tuple(yi % n for yi, n in zip(y, box.dims))
                elif any(not 0 <= yi < n for yi, n in zip(y, box.dims)):
                    continue
                if y != x and grid[y]:
                    seen.add(y)
            if len(seen) >= family.r:
                new[x] = True
        if np.array_equal(new, grid):
            return Configuration(box, grid)
        grid = new


def random_config(rng, dims, p, boundary=Boundary.CLOSED):
    return Configuration(Box(dims, boundary), rng.random(dims) < p)


# ---------------------------------------------------------------------------
# Boxes and configurations
# ---------------------------------------------------------------------------

def test_box_rejects_nonpositive_sides():
    with pytest.raises(InvalidParameterError):
        Box((3, 0))


def test_resource_guard(monkeypatch):
    monkeypatch.setenv("BOOTPERC_MAX_CELLS", "100")
    with pytest.raises(ResourceLimitError) as excinfo:
        Box.cube(11, 2)
    assert excinfo.value.exit_code == 3
    Box.cube(10, 2)


def test_ensure_volume_explicit_limit():
    with pytest.raises(ResourceLimitError):
        ensure_volume(10, limit=9)


def test_table_guard_counts_offsets(monkeypatch):
    monkeypatch.setenv("BOOTPERC_MAX_TABLE_ENTRIES", "1000")
    neighbour_table.cache_clear()
    family = ThresholdFamily.of(1, 1, 2, r=3)
    box = Box.cube(6, 3)
    assert box.volume * len(family.neighborhood()) > 1000
    with pytest.raises(ResourceLimitError) as excinfo:
        closure(family, Configuration.empty(box))
    assert excinfo.value.requested == box.volume * len(family.neighborhood())
    ensure_table(100, 10)


def test_table_cache_is_bounded(square_family):
    neighbour_table.cache_clear()
    for L in range(2, 12):
        closure(square_family, Configuration.full(Box.cube(L, 2)))
    assert neighbour_table.cache_info().currsize <= 2


def test_configuration_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        Configuration(Box((3, 3)), np.zeros((3, 4), dtype=bool))


def test_from_sites_out_of_bounds():
    with pytest.raises(OutOfBoundsError):
        Configuration.from_sites(Box((3, 3)), [(3, 0)])


# ---------------------------------------------------------------------------
# Step and closure
# ---------------------------------------------------------------------------

def test_step_fills_corners(square_family):
    box = Box((3, 3))
    grown = step(square_family, Configuration.from_sites(box, [(0, 0), (1, 1)]))
    assert set(grown.sites()) == {(0, 0), (1, 1), (0, 1), (1, 0)}


def test_step_trivial_configs(square_family):
    box = Box((4, 4))
    assert step(square_family, Configuration.empty(box)).count() == 0
    assert step(square_family, Configuration.full(box)).is_full()


def test_step_dimension_mismatch(square_family):
    with pytest.raises(DimensionMismatchError):
        step(square_family, Configuration.empty(Box((3, 3, 3))))


def test_diagonal_fills_square(square_family):
    box = Box((3, 3))
    assert closure(square_family, Configuration.from_sites(box, [(0, 0), (1, 1), (2, 2)])).is_full()


def test_single_site_stays_put():
    family = ThresholdFamily.of(1, 2, 4, r=5)
    seed = Configuration.from_sites(Box.cube(5, 3), [(2, 2, 2)])
    assert closure(family, seed) == seed


def test_recorded_seed_against_naive():
    family = ThresholdFamily.of(1, 2, r=3)
    seed = Configuration.from_sites(Box((4, 4)), [(0, 0), (0, 2), (2, 1), (3, 3)])
    assert percolates(family, seed) == naive_closure(family, seed).is_full()


@pytest.mark.parametrize("family", FAMILIES, ids=str)
def test_matches_naive_sweeps(family):
    rng = np.random.default_rng(7)
    dims = (5,) * family.dims if family.dims == 2 else (4, 4, 4)
    for _ in range(20):
        seed = random_config(rng, dims, 0.2)
        assert closure(family, seed) == naive_closure(family, seed)


def test_torus_matches_naive():
    rng = np.random.default_rng(3)
    family = ThresholdFamily.of(1, 2, r=3)
    for _ in range(20):
        seed = random_config(rng, (3, 4), 0.25, Boundary.TORUS)
        assert closure(family, seed) == naive_closure(family, seed)


@pytest.mark.parametrize("r", [2, 3])
def test_matches_explicit_rules(r):
    family = ThresholdFamily.of(1, 1, 1, r=r)
    explicit = family.to_explicit()
    rng = np.random.default_rng(r)
    for _ in range(500):
        seed = random_config(rng, (4, 4, 4), rng.uniform(0.05, 0.4))
        assert closure(family, seed) == closure(explicit, seed)


def test_counter_updates_bounded(beams_family):
    rng = np.random.default_rng(11)
    seed = random_config(rng, (6, 6, 6), 0.3)
    result, stats = closure_with_stats(beams_family, seed)
    assert stats.counter_updates <= seed.box.volume * len(beams_family.neighborhood())
    assert stats.rounds <= seed.box.volume
    assert closure(beams_family, result) == result


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(FAMILIES[:2]),
    arrays(bool, (5, 5)),
    arrays(bool, (5, 5)),
)
def test_monotone_and_idempotent(family, a, extra):
    box = Box((5, 5))
    A = Configuration(box, a)
    B = Configuration(box, a | extra)
    closed_a = closure(family, A)
    assert A.issubset(closed_a)
    assert closed_a.issubset(closure(family, B))
    assert closure(family, closed_a) == closed_a


@pytest.mark.parametrize("family", FAMILIES, ids=str)
def test_nested_pairs_monotone_and_idempotent(family):
    rng = np.random.default_rng(200 + family.r)
    dims = (6, 6) if family.dims == 2 else (5, 5, 5)
    box = Box(dims)
    for _ in range(200):
        p = rng.uniform(0.05, 0.35)
        a = rng.random(dims) < p
        b = a | (rng.random(dims) < rng.uniform(0.0, 0.2))
        A, B = Configuration(box, a), Configuration(box, b)
        closed_a, closed_b = closure(family, A), closure(family, B)
        assert A.issubset(closed_a)
        assert closed_a.issubset(closed_b)
        assert closure(family, closed_a) == closed_a
        assert closure(family, closed_b) == closed_b


def test_torus_translation():
    family = ThresholdFamily.of(1, 1, r=2)
    rng = np.random.default_rng(5)
    box = Box((6, 6), Boundary.TORUS)
    for _ in range(10):
        grid = rng.random(box.dims) < 0.2
        shifted = np.roll(grid, (2, 3), axis=(0, 1))
        closed = closure(family, Configuration(box, grid)).infected
        assert np.array_equal(np.roll(closed, (2, 3), axis=(0, 1)), closure(family, Configuration(box, shifted)).infected)


# ---------------------------------------------------------------------------
# Blocks and percolation
# ---------------------------------------------------------------------------

def test_internally_filled(square_family):
    box = Box((4, 4))
    block = SubBlock((0, 0), (2, 2))
    assert is_internally_filled(square_family, block, Configuration.from_sites(box, [(0, 0), (1, 1)]))
    assert is_internally_filled(square_family, block, Configuration.full(box))
    assert not is_internally_filled(square_family, block, Configuration.from_sites(box, [(3, 3)]))


def test_internally_filled_ignores_outside_help(square_family):
    box = Box((3, 3))
    block = SubBlock((0, 0), (2, 2))
    config = Configuration.from_sites(box, [(0, 0), (2, 1), (1, 2)])
    assert not is_internally_filled(square_family, block, config)
    assert closure(square_family, config).infected[:2, :2].all()


def test_block_out_of_bounds(square_family):
    with pytest.raises(OutOfBoundsError):
        is_internally_filled(square_family, SubBlock((2, 2), (2, 2)), Configuration.empty(Box((3, 3))))


def test_percolates_trivial(square_family):
    box = Box((4, 4))
    assert percolates(square_family, Configuration.full(box))
    assert not percolates(square_family, Configuration.empty(box))


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def test_snapshot_format():
    config = Configuration.from_sites(Box((2, 3)), [(0, 0), (0, 1), (1, 2)])
    text = dumps_snapshot(config)
    assert text == "BPGRID 2 2 3 closed\n0 2 3 1\n"
    assert loads_snapshot(text) == config


def test_snapshot_file(tmp_path):
    config = Configuration.from_sites(Box((3, 3), Boundary.TORUS), [(1, 1)])
    path = write_snapshot(config, tmp_path / "seed.grid")
    restored = read_snapshot(path)
    assert restored == config
    assert restored.box.boundary is Boundary.TORUS


@pytest.mark.parametrize("text", ["", "GRID 2 2 2 closed\n4\n", "BPGRID 2 2 2 closed\n1 2\n", "BPGRID 3 2 2 closed\n4\n"])
def test_bad_snapshots(text):
    with pytest.raises(InvalidParameterError):
        loads_snapshot(text)
