"""Bootstrap closures on finite boxes.

Grids are numpy boolean arrays in C order with axes ``(e_1, ..., e_d)``;
cell ``(x_1, ..., x_d)`` is 0-based.  Outside a closed box every site is
healthy; a torus wraps every axis and treats ``x + N`` as a set.

Propagation works on whole frontiers at once: every newly infected cell
adds one to the counter of each of its neighbours, and only those
neighbours are re-examined.  Each counter therefore moves at most ``|N|``
times and a closure costs ``O(volume * |N|)``.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import get_settings
from .exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    OutOfBoundsError,
    ResourceLimitError,
)
from .family import ExplicitFamily, Family, ThresholdFamily
from .utils import get_logger

_logger = get_logger(__name__)

SNAPSHOT_MAGIC = "BPGRID"


class Boundary(Enum):
    CLOSED = "closed"
    TORUS = "torus"


def ensure_volume(volume: int, limit: Optional[int] = None) -> None:
    """Raise ``ResourceLimitError`` if ``volume`` exceeds the cell budget."""
    limit = get_settings().max_cells if limit is None else limit
    if volume > limit:
        raise ResourceLimitError(
            f"Box volume {volume} exceeds max cells {limit}", requested=volume, limit=limit
        )


def ensure_table(volume: int, width: int, limit: Optional[int] = None) -> None:
    """Raise ``ResourceLimitError`` if a ``volume x width`` neighbour table is over budget."""
    limit = get_settings().max_table_entries if limit is None else limit
    entries = volume * width
    if entries > limit:
        raise ResourceLimitError(
            f"Neighbour table of {volume} cells x {width} offsets exceeds {limit} entries",
            requested=entries,
            limit=limit,
        )


@dataclass(frozen=True)
class Box:
    dims: Tuple[int, ...]
    boundary: Boundary = Boundary.CLOSED

    def __post_init__(self) -> None:
        dims = tuple(int(x) for x in self.dims)
        if not dims or any(x < 1 for x in dims):
            raise InvalidParameterError(f"Box sides must be positive, got {dims}", name="dims", value=dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        ensure_volume(self.volume)

    @classmethod
    def cube(cls, side: int, d: int, boundary: Boundary = Boundary.CLOSED) -> "Box":
        return cls((side,) * d, boundary)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def volume(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))


@dataclass(eq=False)
class Configuration:
    """Infected sites of a box. Mutable, owned by a single trial."""

    box: Box
    infected: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.infected, dtype=bool)
        if grid.shape != self.box.dims:
            raise DimensionMismatchError(
                f"Grid shape {grid.shape} does not match box {self.box.dims}",
                expected=self.box.d,
                actual=grid.ndim,
            )
        self.infected = np.ascontiguousarray(grid)

    @classmethod
    def empty(cls, box: Box) -> "Configuration":
        return cls(box, np.zeros(box.dims, dtype=bool))

    @classmethod
    def full(cls, box: Box) -> "Configuration":
        return cls(box, np.ones(box.dims, dtype=bool))

    @classmethod
    def from_sites(cls, box: Box, sites: Iterable[Sequence[int]]) -> "Configuration":
        config = cls.empty(box)
        for site in sites:
            site = tuple(site)
            if len(site) != box.d or any(not 0 <= x < n for x, n in zip(site, box.dims)):
                raise OutOfBoundsError(f"Site {site} is outside box {box.dims}")
            config.infected[site] = True
        return config

    def copy(self) -> "Configuration":
        return Configuration(self.box, self.infected.copy())

    def count(self) -> int:
        return int(self.infected.sum())

    def is_full(self) -> bool:
        return bool(self.infected.all())

    def issubset(self, other: "Configuration") -> bool:
        return self.box == other.box and not bool((self.infected & ~other.infected).any())

    def sites(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(int(x) for x in row) for row in np.argwhere(self.infected))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.box == other.box and np.array_equal(self.infected, other.infected)

    def __repr__(self) -> str:
        return f"Configuration(dims={self.box.dims}, boundary={self.box.boundary.value}, infected={self.count()})"


@dataclass(frozen=True)
class SubBlock:
    """Rectangular block ``origin + [extent_1] x ... x [extent_d]``."""

    origin: Tuple[int, ...]
    extents: Tuple[int, ...]

    def __post_init__(self) -> None:
        origin = tuple(int(x) for x in self.origin)
        extents = tuple(int(x) for x in self.extents)
        if len(origin) != len(extents):
            raise DimensionMismatchError(
                "Block origin and extents differ in dimension", expected=len(origin), actual=len(extents)
            )
        if any(x < 1 for x in extents):
            raise InvalidParameterError(f"Block extents must be positive, got {extents}", name="extents")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extents", extents)

    @property
    def slices(self) -> Tuple[slice, ...]:
        return tuple(slice(o, o + e) for o, e in zip(self.origin, self.extents))

    def fits(self, box: Box) -> bool:
        return len(self.origin) == box.d and all(
            o >= 0 and o + e <= n for o, e, n in zip(self.origin, self.extents, box.dims)
        )


# ---------------------------------------------------------------------------
# Neighbour tables
# ---------------------------------------------------------------------------

# Holds a table and its reverse for the explicit engine; older boxes are evicted.
@lru_cache(maxsize=2)
def neighbour_table(
    dims: Tuple[int, ...], boundary: Boundary, offsets: Tuple[Tuple[int, ...], ...], dedupe: bool = False
) -> np.ndarray:
    """Flat index of ``x + v`` for every cell ``x`` and offset ``v``; -1 when absent.

    With ``dedupe`` each row keeps only the first occurrence of a cell and
    drops the cell itself, which gives set semantics on a torus.
    """
    volume = int(np.prod(dims, dtype=np.int64))
    ensure_table(volume, len(offsets))
    dtype = np.int32 if volume < 2**31 - 1 else np.int64
    shape = np.array(dims, dtype=np.int64)
    coords = np.indices(dims, dtype=np.int64).reshape(len(dims), -1).T
    table = np.empty((volume, len(offsets)), dtype=dtype)
    for j, offset in enumerate(offsets):
        target = coords + np.asarray(offset, dtype=np.int64)
        if boundary is Boundary.TORUS:
            target %= shape
            table[:, j] = np.ravel_multi_index(target.T, dims)
        else:
            valid = np.all((target >= 0) & (target < shape), axis=1)
            column = np.full(volume, -1, dtype=dtype)
            column[valid] = np.ravel_multi_index(target[valid].T, dims)
            table[:, j] = column
    if dedupe and boundary is Boundary.TORUS:
        own = np.arange(volume, dtype=dtype)
        for j in range(len(offsets)):
            repeated = table[:, j] == own
            for i in range(j):
                repeated |= table[:, j] == table[:, i]
            table[repeated, j] = -1
    table.setflags(write=False)
    return table


def _check_dims(family: Family, box: Box) -> None:
    if family.dims != box.d:
        raise DimensionMismatchError(
            f"Family is {family.dims}-dimensional but box is {box.d}-dimensional",
            expected=family.dims,
            actual=box.d,
        )


def _gather(flat: np.ndarray, table: np.ndarray) -> np.ndarray:
    """``flat[table]`` with absent entries read as healthy."""
    present = table >= 0
    out = np.zeros(table.shape, dtype=bool)
    out[present] = flat[table[present]]
    return out


def _threshold_counts(flat: np.ndarray, table: np.ndarray) -> np.ndarray:
    return _gather(flat, table).sum(axis=1, dtype=np.int32)


class _RuleMatcher:
    """Evaluates an explicit family on a set of cells."""

    def __init__(self, family: ExplicitFamily, box: Box):
        offsets = family.offsets()
        column = {v: j for j, v in enumerate(offsets)}
        self.table = neighbour_table(box.dims, box.boundary, offsets)
        self.reverse = neighbour_table(box.dims, box.boundary, tuple(tuple(-x for x in v) for v in offsets))
        self.rule_columns = [np.array(sorted(column[v] for v in rule)) for rule in family.rules]

    def fires(self, flat: np.ndarray, cells: np.ndarray) -> np.ndarray:
        present = _gather(flat, self.table[cells])
        hit = np.zeros(len(cells), dtype=bool)
        for columns in self.rule_columns:
            hit |= present[:, columns].all(axis=1)
        return hit


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosureStats:
    rounds: int
    counter_updates: int


def step(family: Family, config: Configuration) -> Configuration:
    """One synchronous update."""
    box = config.box
    _check_dims(family, box)
    flat = config.infected.ravel()
    if isinstance(family, ThresholdFamily):
        table = neighbour_table(box.dims, box.boundary, family.neighborhood(), dedupe=True)
        grown = flat | (_threshold_counts(flat, table) >= family.r)
    else:
        matcher = _RuleMatcher(family, box)
        grown = flat | matcher.fires(flat, np.arange(box.volume))
    return Configuration(box, grown.reshape(box.dims))


def closure_with_stats(family: Family, config: Configuration) -> Tuple[Configuration, ClosureStats]:
    box = config.box
    _check_dims(family, box)
    flat = config.infected.ravel().copy()
    rounds = 0
    updates = 0

    if isinstance(family, ThresholdFamily):
        table = neighbour_table(box.dims, box.boundary, family.neighborhood(), dedupe=True)
        counts = _threshold_counts(flat, table)
        frontier = np.flatnonzero(~flat & (counts >= family.r))
        flat[frontier] = True
        while frontier.size:
            rounds += 1
            touched = table[frontier].ravel()
            touched = touched[touched >= 0]
            updates += touched.size
            np.add.at(counts, touched, 1)
            candidates = np.unique(touched)
            frontier = candidates[~flat[candidates] & (counts[candidates] >= family.r)]
            flat[frontier] = True
    else:
        matcher = _RuleMatcher(family, box)
        healthy = np.flatnonzero(~flat)
        frontier = healthy[matcher.fires(flat, healthy)]
        flat[frontier] = True
        while frontier.size:
            rounds += 1
            touched = matcher.reverse[frontier].ravel()
            touched = touched[touched >= 0]
            updates += touched.size
            candidates = np.unique(touched)
            candidates = candidates[~flat[candidates]]
            frontier = candidates[matcher.fires(flat, candidates)]
            flat[frontier] = True

    return Configuration(box, flat.reshape(box.dims)), ClosureStats(rounds, updates)


def closure(family: Family, config: Configuration) -> Configuration:
    """Least fixed point of ``step`` containing ``config``."""
    result, stats = closure_with_stats(family, config)
    _logger.debug(
        "closure dims=%s rounds=%d updates=%d infected=%d",
        config.box.dims, stats.rounds, stats.counter_updates, result.count(),
    )
    return result


def restrict(config: Configuration, block: SubBlock) -> Configuration:
    """``A ∩ R`` as a configuration of the block's own closed box."""
    if not block.fits(config.box):
        raise OutOfBoundsError(f"Block {block} does not fit in box {config.box.dims}")
    return Configuration(Box(block.extents, Boundary.CLOSED), config.infected[block.slices].copy())


def is_internally_filled(family: Family, block: SubBlock, config: Configuration) -> bool:
    """True iff the seeds inside ``block``, evolving inside it only, fill it."""
    _check_dims(family, config.box)
    return closure(family, restrict(config, block)).is_full()


def percolates(family: Family, config: Configuration) -> bool:
    return closure(family, config).is_full()


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def dumps_snapshot(config: Configuration) -> str:
    """Header ``BPGRID d L1 .. Ld boundary`` and run lengths starting with healthy."""
    box = config.box
    flat = config.infected.ravel().astype(np.int8)
    edges = np.flatnonzero(np.diff(flat)) + 1
    runs = np.diff(np.concatenate(([0], edges, [flat.size])))
    runs = runs.tolist()
    if flat[0]:
        runs.insert(0, 0)
    header = " ".join([SNAPSHOT_MAGIC, str(box.d), *map(str, box.dims), box.boundary.value])
    return header + "\n" + " ".join(map(str, runs)) + "\n"


def loads_snapshot(text: str) -> Configuration:
    lines = text.strip().splitlines()
    if not lines:
        raise InvalidParameterError("Empty snapshot", name="snapshot")
    head = lines[0].split()
    if len(head) < 3 or head[0] != SNAPSHOT_MAGIC:
        raise InvalidParameterError(f"Not a snapshot header: {lines[0]!r}", name="snapshot")
    d = int(head[1])
    if len(head) != d + 3:
        raise InvalidParameterError(f"Header declares d={d} but lists {len(head) - 3} sides", name="snapshot")
    box = Box(tuple(int(x) for x in head[2 : 2 + d]), Boundary(head[2 + d]))
    runs = [int(x) for x in " ".join(lines[1:]).split()]
    if sum(runs) != box.volume or any(x < 0 for x in runs):
        raise InvalidParameterError(
            f"Run lengths sum to {sum(runs)}, box volume is {box.volume}", name="snapshot"
        )
    values = np.arange(len(runs)) % 2 == 1
    flat = np.repeat(values, runs)
    return Configuration(box, flat.reshape(box.dims))


def write_snapshot(config: Configuration, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_snapshot(config), encoding="utf-8")
    return path


def read_snapshot(path: Union[str, Path]) -> Configuration:
    return loads_snapshot(Path(path).read_text(encoding="utf-8"))
