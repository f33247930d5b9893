"""Coarse bootstrap percolation, generated beams and the coarse beams process.

Cross-sections live in the ``(e_1, e_2)`` plane and heights along ``e_3``.
A cross-section is connected when it is connected in the graph
``u ~ v iff u - v in N_{a,b}``; closures of cross-sections are taken under
the subcritical family ``N_m^{a,b}`` with ``m = a + b + 1``.  Coarse beams
are unions of ``(b+1) x (b+1)`` blocks anchored at the origin and are
checked for connectivity on the block lattice.
"""

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .config import get_settings
from .engine import Box, Configuration, closure, percolates, step
from .exceptions import (
    BoundExceededError,
    DisconnectedProjectionError,
    InvalidParameterError,
    NotApplicableError,
    WindowTooSmallError,
)
from .family import Criticality, NeighborhoodSpec, ThresholdFamily, require
from .sampler import BernoulliSeeding, ProbabilityEstimate, bernoulli_grid, run_trials
from .utils import get_logger

_logger = get_logger(__name__)

Cell2 = Tuple[int, int]
Cell3 = Tuple[int, int, int]


# ---------------------------------------------------------------------------
# Coarse lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoarseGrid:
    """Partition of ``[L_1] x [L_2]`` into ``block_edge``-sided blocks."""

    block_edge: int
    fine_dims: Tuple[int, int]

    def __post_init__(self) -> None:
        if self.block_edge < 1:
            raise InvalidParameterError("block_edge must be positive", name="block_edge", value=self.block_edge)
        dims = tuple(int(x) for x in self.fine_dims)
        if len(dims) != 2:
            raise InvalidParameterError(f"Coarse grids are two-dimensional, got {dims}", name="fine_dims")
        if any(x % self.block_edge for x in dims):
            raise InvalidParameterError(
                f"Block edge {self.block_edge} does not divide {dims}", name="block_edge", value=self.block_edge
            )
        object.__setattr__(self, "fine_dims", dims)

    @classmethod
    def for_family(cls, family: ThresholdFamily, L: int) -> "CoarseGrid":
        return cls(family.radii[1] + 1, (L, L))

    @property
    def dims(self) -> Tuple[int, int]:
        return tuple(x // self.block_edge for x in self.fine_dims)

    def coarse_seed(self, fine: Configuration, threshold: Optional[int] = None) -> Configuration:
        """Block infected iff it holds at least ``threshold`` infected sites (default: all)."""
        if fine.box.dims != self.fine_dims:
            raise InvalidParameterError(f"Fine box {fine.box.dims} is not {self.fine_dims}", name="fine")
        q = self.block_edge
        threshold = q * q if threshold is None else int(threshold)
        counts = fine.infected.reshape(self.dims[0], q, self.dims[1], q).sum(axis=(1, 3))
        return Configuration(Box(self.dims), counts >= threshold)

    def refine(self, coarse: Configuration) -> Configuration:
        q = self.block_edge
        grid = np.repeat(np.repeat(coarse.infected, q, axis=0), q, axis=1)
        return Configuration(Box(self.fine_dims), grid)


def coarse_closure(family_2d: ThresholdFamily, coarse: Configuration) -> Configuration:
    """The 2D closure run on the block lattice."""
    if family_2d.dims != 2 or coarse.box.d != 2:
        raise InvalidParameterError("coarse_closure needs a 2D family and a 2D coarse grid", name="family_2d")
    return closure(family_2d, coarse)


# ---------------------------------------------------------------------------
# Connectivity helpers
# ---------------------------------------------------------------------------

def _components(cells: Iterable[Cell2], offsets: Sequence[Cell2]) -> List[Set[Cell2]]:
    points = np.array(sorted(set(map(tuple, cells))), dtype=np.int64).reshape(-1, 2)
    n = len(points)
    if n == 0:
        return []
    reach = int(np.abs(np.asarray(offsets, dtype=np.int64)).max()) if len(offsets) else 0
    lo = points.min(axis=0) - reach
    width = int(points[:, 1].max() - lo[1]) + reach + 1
    keys = (points[:, 0] - lo[0]) * width + (points[:, 1] - lo[1])
    rows, cols = [np.empty(0, np.int64)], [np.empty(0, np.int64)]
    for dx, dy in offsets:
        target = (points[:, 0] + dx - lo[0]) * width + (points[:, 1] + dy - lo[1])
        pos = np.minimum(np.searchsorted(keys, target), n - 1)
        hit = keys[pos] == target
        rows.append(np.flatnonzero(hit))
        cols.append(pos[hit])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    out: Dict[int, Set[Cell2]] = {}
    for (x, y), label in zip(points.tolist(), labels):
        out.setdefault(int(label), set()).add((x, y))
    return list(out.values())


def family_components(cells: Iterable[Cell2], a: int, b: int) -> List[Set[Cell2]]:
    """Components of ``cells`` in the ``N_{a,b}`` graph."""
    return _components(cells, NeighborhoodSpec((a, b)).vectors())


def _bbox(cells: Iterable[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.array(list(cells), dtype=np.int64)
    return arr.min(axis=0), arr.max(axis=0)


def closure_2d(cells: Iterable[Cell2], a: int, b: int) -> FrozenSet[Cell2]:
    """Closure under ``N_{a+b+1}^{a,b}``; it never leaves the bounding box."""
    cells = list(cells)
    if not cells:
        return frozenset()
    lo, hi = _bbox(cells)
    box = Box(tuple(int(x) for x in hi - lo + 1))
    config = Configuration.from_sites(box, (tuple(np.array(c) - lo) for c in cells))
    closed = closure(ThresholdFamily(NeighborhoodSpec((a, b)), a + b + 1), config)
    return frozenset((int(x + lo[0]), int(y + lo[1])) for x, y in closed.sites())


def strongly_connected(S1: Iterable[Sequence[int]], S2: Iterable[Sequence[int]], c: int) -> bool:
    """True iff ``S1 ∪ S2`` is connected under ``||u - v||_inf <= 2c``; the empty set is not."""
    points = np.array(sorted(set(map(tuple, S1)) | set(map(tuple, S2))), dtype=np.int64)
    if len(points) == 0:
        return False
    if len(points) == 1:
        return True
    pairs = cKDTree(points).query_pairs(2 * c, p=np.inf, output_type="ndarray")
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    count, _ = connected_components(graph, directed=False)
    return count == 1


# ---------------------------------------------------------------------------
# Beams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Beam:
    """``H x [base_level, base_level + height)``; ``scale`` is 1 for fine beams, ``b + 1`` for coarse."""

    cross_section: FrozenSet[Cell2]
    base_level: int
    height: int
    scale: int = 1
    path: Tuple[Cell2, ...] = ()

    @property
    def top_level(self) -> int:
        return self.base_level + self.height - 1

    @property
    def area(self) -> int:
        return len(self.cross_section)

    @property
    def volume(self) -> int:
        return self.area * self.height

    def cells(self) -> Iterable[Cell3]:
        for x, y in sorted(self.cross_section):
            for z in range(self.base_level, self.base_level + self.height):
                yield (x, y, z)

    def blocks(self) -> FrozenSet[Cell2]:
        q = self.scale
        return frozenset((x // q, y // q) for x, y in self.cross_section)

    def contains(self, cell: Sequence[int]) -> bool:
        x, y, z = cell
        return (x, y) in self.cross_section and self.base_level <= z <= self.top_level

    def covers(self, other: "Beam") -> bool:
        return (
            other.cross_section <= self.cross_section
            and self.base_level <= other.base_level
            and other.top_level <= self.top_level
        )

    def verify(self, a: int, b: int) -> bool:
        """Connected at its own scale and a fixed point of ``N_{a+b+1}^{a,b}``."""
        if self.height < 1 or not self.cross_section:
            return False
        blocks = self.blocks()
        q = self.scale
        if q > 1 and len(blocks) * q * q != self.area:
            return False
        if len(family_components(blocks, a, b)) != 1:
            return False
        return closure_2d(self.cross_section, a, b) == self.cross_section

    def to_dict(self) -> dict:
        return {
            "cross_section": [list(c) for c in sorted(self.cross_section)],
            "base_level": self.base_level,
            "height": self.height,
            "scale": self.scale,
            "path": [list(c) for c in self.path],
        }


def _shortest_path(H1: Set[Cell2], H2: Set[Cell2], a: int, b: int) -> Tuple[Cell2, ...]:
    """Interior cells of the lexicographically smallest minimal path from H1 to H2."""
    offsets = NeighborhoodSpec((a, b)).vectors()
    lo, hi = _bbox(H1 | H2)
    inside = lambda v: lo[0] <= v[0] <= hi[0] and lo[1] <= v[1] <= hi[1]  # noqa: E731

    dist: Dict[Cell2, int] = {v: 0 for v in H2}
    queue = deque(sorted(H2))
    while queue:
        u = queue.popleft()
        for dx, dy in offsets:
            v = (u[0] + dx, u[1] + dy)
            if inside(v) and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)

    D = min(dist[u] for u in H1)
    if D <= 1:
        return ()

    def neighbours(u: Cell2) -> List[Cell2]:
        return [(u[0] + dx, u[1] + dy) for dx, dy in offsets]

    first = sorted(
        v for u in H1 for v in neighbours(u) if dist.get(v) == D - 1 and v not in H1
    )
    path = [first[0]]
    while dist[path[-1]] > 1:
        here = dist[path[-1]]
        path.append(min(v for v in neighbours(path[-1]) if dist.get(v) == here - 1))
    return tuple(path)


def _generate(
    proj1: Set[Cell2], proj2: Set[Cell2], z_lo: int, z_hi: int, a: int, b: int, scale: int
) -> Beam:
    q = scale
    H1 = {(x // q, y // q) for x, y in proj1}
    H2 = {(x // q, y // q) for x, y in proj2}
    for name, H in (("H1", H1), ("H2", H2)):
        parts = len(family_components(H, a, b))
        if parts != 1:
            raise DisconnectedProjectionError(f"Projection {name} has {parts} components", components=parts)

    union = H1 | H2
    closed = closure_2d(union, a, b)
    path: Tuple[Cell2, ...] = ()
    if len(family_components(closed, a, b)) != 1:
        path = _shortest_path(H1, H2, a, b)
        closed = closure_2d(union | set(path), a, b)

    fine = frozenset(
        (X * q + i, Y * q + j) for X, Y in closed for i in range(q) for j in range(q)
    )
    return Beam(fine, z_lo, z_hi - z_lo + 1, q, path)


def generate_beam(
    S1: Iterable[Sequence[int]], S2: Iterable[Sequence[int]], a: int, b: int, *, scale: int = 1
) -> Beam:
    """Beam ``<H1 ∪ H2 ∪ P> x [w]`` generated by two 3D cell sets."""
    S1 = [tuple(x) for x in S1]
    S2 = [tuple(x) for x in S2]
    if not S1 or not S2:
        raise InvalidParameterError("Both sets must be nonempty", name="S")
    zs = [z for _, _, z in S1 + S2]
    return _generate(
        {(x, y) for x, y, _ in S1}, {(x, y) for x, y, _ in S2}, min(zs), max(zs), a, b, scale
    )


# ---------------------------------------------------------------------------
# The coarse beams process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MergeRecord:
    step: int
    left: int
    right: int
    new_id: int
    path: Tuple[Cell2, ...]
    beam: Beam

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "left": self.left,
            "right": self.right,
            "new_id": self.new_id,
            "path": [list(c) for c in self.path],
            "beam": self.beam.to_dict(),
        }


@dataclass
class BeamCollection:
    family: ThresholdFamily
    box_dims: Tuple[int, ...]
    members: Dict[int, Beam] = field(default_factory=dict)
    log: List[MergeRecord] = field(default_factory=list)
    percolating: bool = False
    scale: int = 1

    @property
    def beams(self) -> List[Beam]:
        return [self.members[i] for i in sorted(self.members)]

    @property
    def covered(self) -> List[Beam]:
        return [record.beam for record in self.log]

    def to_dict(self) -> dict:
        return {
            "family": str(self.family),
            "box": list(self.box_dims),
            "scale": self.scale,
            "percolating": self.percolating,
            "initial": len(self.members) + len(self.log),
            "final": len(self.members),
            "merges": [record.to_dict() for record in self.log],
        }


def _interval_gap(b1: Beam, b2: Beam) -> int:
    return max(0, b2.base_level - b1.top_level, b1.base_level - b2.top_level)


def _xy_tree(beam: Beam) -> cKDTree:
    return cKDTree(np.array(sorted(beam.cross_section)))


def beam_distance(b1: Beam, b2: Beam, tree2: Optional[cKDTree] = None) -> int:
    """Smallest ``l_inf`` distance between a cell of ``b1`` and a cell of ``b2``."""
    tree2 = _xy_tree(b2) if tree2 is None else tree2
    d2, _ = tree2.query(np.array(sorted(b1.cross_section)), k=1, p=np.inf)
    return max(int(np.min(d2)), _interval_gap(b1, b2))


def _union_volume(b1: Beam, b2: Beam) -> int:
    overlap = max(0, min(b1.top_level, b2.top_level) - max(b1.base_level, b2.base_level) + 1)
    return b1.volume + b2.volume - len(b1.cross_section & b2.cross_section) * overlap


def _generation_grows(b1: Beam, b2: Beam, a: int, b: int, scale: int) -> bool:
    """True iff the beam generated by ``b1 ∪ b2`` at ``scale`` is strictly larger than the union."""
    for outer, inner in ((b1, b2), (b2, b1)):
        if outer.scale == scale and outer.covers(inner):
            return False
    # A singleton never fills its block, so coarse generation always adds cells.
    if scale > 1 and 1 in (b1.scale, b2.scale):
        return True
    if _interval_gap(b1, b2) > 1:
        return True
    z_lo = min(b1.base_level, b2.base_level)
    z_hi = max(b1.top_level, b2.top_level)
    for first, second in ((b1, b2), (b2, b1)):
        if not first.cross_section <= second.cross_section and (first.base_level, first.top_level) != (z_lo, z_hi):
            return True
    merged = _generate(set(b1.cross_section), set(b2.cross_section), z_lo, z_hi, a, b, scale)
    return merged.volume > _union_volume(b1, b2)


def _union_grows(family: ThresholdFamily, box_dims: Tuple[int, ...], b1: Beam, b2: Beam) -> bool:
    """True iff one update of ``family`` on ``b1 ∪ b2`` infects a new site of the box."""
    a, b, _ = family.radii
    for outer, inner in ((b1, b2), (b2, b1)):
        # A coarse beam is closed once r > a + b.
        if outer.scale > 1 and outer.covers(inner) and family.r > a + b:
            return False
    cells = set(b1.cells()) | set(b2.cells())
    if len(cells) < family.r:
        return False
    pad = family.largest_radius
    lo, hi = _bbox(cells)
    lo = np.maximum(lo - pad, 0)
    hi = np.minimum(hi + pad, np.array(box_dims) - 1)
    box = Box(tuple(int(x) for x in hi - lo + 1))
    config = Configuration.from_sites(box, (tuple(np.array(c) - lo) for c in cells))
    return step(family, config).count() > len(cells)


def _qualifies(
    family: ThresholdFamily,
    box_dims: Tuple[int, ...],
    scale: int,
    b1: Beam,
    b2: Beam,
    distance: Optional[int] = None,
) -> bool:
    """Strongly connected, and either the closure or the generated beam exceeds the union."""
    a, b, c = family.radii
    distance = beam_distance(b1, b2) if distance is None else distance
    if distance > 2 * c:
        return False
    return _generation_grows(b1, b2, a, b, scale) or _union_grows(family, box_dims, b1, b2)


def _require_process_family(family: ThresholdFamily) -> None:
    if family.dims != 3:
        raise NotApplicableError("The beams process needs a three-dimensional family")
    if family.r < family.largest_radius + 1:
        raise NotApplicableError(f"The beams process needs r >= c+1, got {family}")


def _extent(beam: Beam) -> Tuple[np.ndarray, np.ndarray]:
    xy_lo, xy_hi = _bbox(beam.cross_section)
    return np.array([*xy_lo, beam.base_level]), np.array([*xy_hi, beam.top_level])


def beams_process(A: Configuration, family: ThresholdFamily, *, coarse: bool = True) -> BeamCollection:
    """Merge the lexicographically smallest qualifying pair until none is left."""
    _require_process_family(family)
    a, b, c = family.radii
    reach = 2 * c
    scale = CoarseGrid(b + 1, A.box.dims[:2]).block_edge if coarse else 1

    sites = A.sites()
    n = len(sites)
    collection = BeamCollection(family, A.box.dims, scale=scale, percolating=percolates(family, A))
    for i, (x, y, z) in enumerate(sites):
        collection.members[i] = Beam(frozenset({(x, y)}), z, 1, 1)

    # Ids never exceed 2n - 2: every merge retires two members.
    capacity = max(2 * n - 1, 1)
    lo = np.zeros((capacity, 3), dtype=np.int64)
    hi = np.zeros((capacity, 3), dtype=np.int64)
    alive = np.zeros(capacity, dtype=bool)
    if n:
        lo[:n] = hi[:n] = np.array(sites, dtype=np.int64)
        alive[:n] = True

    heap: List[Tuple[int, int]] = []
    if n > 1:
        pairs = cKDTree(np.array(sites)).query_pairs(reach, p=np.inf, output_type="ndarray")
        for i, j in pairs.tolist():
            if scale > 1 or _qualifies(family, A.box.dims, scale, collection.members[i], collection.members[j], 0):
                heap.append((min(i, j), max(i, j)))
        heapq.heapify(heap)

    next_id = n
    while heap:
        i, j = heapq.heappop(heap)
        if not (alive[i] and alive[j]):
            continue
        left, right = collection.members.pop(i), collection.members.pop(j)
        alive[i] = alive[j] = False
        z_lo = min(left.base_level, right.base_level)
        z_hi = max(left.top_level, right.top_level)
        merged = _generate(set(left.cross_section), set(right.cross_section), z_lo, z_hi, a, b, scale)
        new_id = next_id
        next_id += 1
        collection.members[new_id] = merged
        collection.log.append(MergeRecord(len(collection.log), i, j, new_id, merged.path, merged))
        lo[new_id], hi[new_id] = _extent(merged)
        alive[new_id] = True

        gap = np.maximum(lo[:new_id] - hi[new_id], lo[new_id] - hi[:new_id]).max(axis=1)
        near = np.flatnonzero(alive[:new_id] & (gap <= reach))
        if near.size == 0:
            continue
        tree = _xy_tree(merged)
        distance = np.empty(near.size, dtype=np.int64)
        singles = near < n
        if singles.any():
            d_xy, _ = tree.query(lo[near[singles], :2], k=1, p=np.inf)
            z = lo[near[singles], 2]
            d_z = np.maximum(0, np.maximum(merged.base_level - z, z - merged.top_level))
            distance[singles] = np.maximum(d_xy.astype(np.int64), d_z)
        for pos in np.flatnonzero(~singles):
            distance[pos] = beam_distance(collection.members[int(near[pos])], merged, tree)
        for k, d in zip(near[distance <= reach].tolist(), distance[distance <= reach].tolist()):
            if _qualifies(family, A.box.dims, scale, collection.members[k], merged, d):
                heapq.heappush(heap, (k, new_id))

    _logger.info(
        "beams family=%s scale=%d sites=%d merges=%d final=%d percolating=%s",
        family, scale, n, len(collection.log), len(collection.members), collection.percolating,
    )
    return collection


def check_stop_condition(collection: BeamCollection) -> bool:
    """No two members are strongly connected with a growing union."""
    family = collection.family
    reach = 2 * family.radii[2]
    beams = [collection.members[i] for i in sorted(collection.members)]
    if len(beams) < 2:
        return True
    extents = [_extent(beam) for beam in beams]
    lo = np.array([e[0] for e in extents])
    hi = np.array([e[1] for e in extents])
    trees: Dict[int, cKDTree] = {}
    for n, first in enumerate(beams[:-1]):
        gap = np.maximum(lo[n + 1 :] - hi[n], lo[n] - hi[n + 1 :]).max(axis=1)
        for m in (np.flatnonzero(gap <= reach) + n + 1).tolist():
            second = beams[m]
            if m not in trees:
                trees[m] = _xy_tree(second)
            distance = beam_distance(first, second, trees[m])
            if _qualifies(family, collection.box_dims, collection.scale, first, second, distance):
                return False
    return True


# ---------------------------------------------------------------------------
# Aizenman-Lebowitz-type scale check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleHit:
    h: int
    k: int
    found: bool
    beam_id: Optional[int] = None
    area: Optional[int] = None
    height: Optional[int] = None


@dataclass
class ALReport:
    lam: Optional[float]
    percolating: bool
    hits: List[ScaleHit] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [vars(hit) for hit in self.hits], columns=["h", "k", "found", "beam_id", "area", "height"]
        )


def dyadic_scales(L: int) -> List[Tuple[int, int]]:
    scales = []
    n = 1
    while n <= L:
        scales.append((n, n))
        n *= 2
    return scales


def al_check(
    collection: BeamCollection, scales: Sequence[Tuple[int, int]], lam: Optional[float] = None
) -> ALReport:
    """For each ``(h, k)``, look for a covered beam with ``w <= lam k``, ``|H| <= lam h`` and ``w >= k or |H| >= h``.

    ``lam=None`` drops the upper limits.
    """
    report = ALReport(lam, collection.percolating)
    if not collection.percolating:
        report.warnings.append("sample does not percolate; the scale check has no guarantee")
    for h, k in scales:
        hit = ScaleHit(h, k, False)
        for record in collection.log:
            beam = record.beam
            if lam is not None and (beam.height > lam * k or beam.area > lam * h):
                continue
            if beam.height >= k or beam.area >= h:
                hit = ScaleHit(h, k, True, record.new_id, beam.area, beam.height)
                break
        if not hit.found:
            report.warnings.append(f"no covered beam at scale h={h}, k={k}")
        report.hits.append(hit)
    return report


# ---------------------------------------------------------------------------
# Beam counting
# ---------------------------------------------------------------------------

def _polyominoes(window: Tuple[int, int], h_max: int) -> Dict[int, int]:
    """Connected subsets of the ``window`` grid by size, up to ``h_max`` cells."""
    W1, W2 = window
    adjacency: Dict[Cell2, List[Cell2]] = {}
    for x in range(W1):
        for y in range(W2):
            adjacency[(x, y)] = [
                (x + dx, y + dy)
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= x + dx < W1 and 0 <= y + dy < W2
            ]
    counts = {n: 0 for n in range(1, h_max + 1)}
    stack = [frozenset([v]) for v in adjacency]
    visited = set(stack)
    while stack:
        current = stack.pop()
        counts[len(current)] += 1
        if len(current) >= h_max:
            continue
        for u in current:
            for v in adjacency[u]:
                if v not in current:
                    grown = current | {v}
                    if grown not in visited:
                        visited.add(grown)
                        stack.append(grown)
    return counts


def beam_count_bound(L: int, h: int) -> float:
    return float(L) ** 4 * (3 * math.e) ** h


def enumerate_beams_small(
    h_max: int, k_max: int, window: Sequence[int], *, anchored: bool = False
) -> int:
    """Count connected ``H x [w]`` in ``window`` with ``|H| <= h_max`` and ``w <= k_max``."""
    if h_max > 8:
        raise InvalidParameterError(f"h_max={h_max} is not tractable (max 8)", name="h_max", value=h_max)
    if h_max < 1 or k_max < 1:
        raise InvalidParameterError("h_max and k_max must be positive", name="h_max")
    window = tuple(int(x) for x in window)
    if len(window) != 3:
        raise InvalidParameterError(f"window must have three sides, got {window}", name="window")
    if min(window) <= 0:
        return 0
    W1, W2, W3 = window
    sections = sum(_polyominoes((W1, W2), h_max).values())
    if anchored:
        heights = min(k_max, W3)
    else:
        heights = sum(W3 - w + 1 for w in range(1, min(k_max, W3) + 1))
    count = sections * heights
    bound = beam_count_bound(max(window), h_max)
    if count > bound:
        raise BoundExceededError(f"Counted {count} beams, bound is {bound:.3g}", count=count, bound=bound)
    return count


# ---------------------------------------------------------------------------
# Subcritical cluster decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterRecord:
    cluster: FrozenSet[Cell2]
    censored: bool

    @property
    def size(self) -> int:
        return len(self.cluster)


def _require_subcritical(family_2d: ThresholdFamily) -> None:
    if family_2d.dims != 2:
        raise NotApplicableError("Cluster decay needs a two-dimensional family")
    require(family_2d, Criticality.SUBCRITICAL)


def _check_window(window: int) -> int:
    window = int(window)
    if window < 1 or window % 2 == 0:
        raise InvalidParameterError(f"window must be a positive odd side, got {window}", name="window", value=window)
    return window


def _origin_cluster(family_2d: ThresholdFamily, window: int, seeding: BernoulliSeeding) -> ClusterRecord:
    box = Box((window, window))
    closed = closure(family_2d, Configuration(box, bernoulli_grid(box, seeding)))
    centre = window // 2
    if not closed.infected[centre, centre]:
        return ClusterRecord(frozenset(), False)
    labels, _ = ndimage.label(closed.infected)
    mask = labels == labels[centre, centre]
    censored = bool(mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any())
    cells = frozenset((int(x) - centre, int(y) - centre) for x, y in np.argwhere(mask))
    return ClusterRecord(cells, censored)


def cluster_of_origin(family_2d: ThresholdFamily, window: int, seeding: BernoulliSeeding) -> ClusterRecord:
    """Cluster of the window centre in the closure; coordinates relative to the centre."""
    _require_subcritical(family_2d)
    return _origin_cluster(family_2d, _check_window(window), seeding)


def _cluster_trial(family_2d, window, seeding: BernoulliSeeding, trial_index: int) -> Tuple[int, bool]:
    record = _origin_cluster(family_2d, window, seeding.at(trial_index))
    return record.size, record.censored


@dataclass(frozen=True)
class DecayRow:
    n: int
    tail: float
    estimate: ProbabilityEstimate


@dataclass
class DecayTable:
    epsilon: float
    window: int
    trials: int
    censored_fraction: float
    slope: float
    rows: List[DecayRow] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "n": row.n,
                    "tail": row.tail,
                    "censored_frac": self.censored_fraction,
                    "ci_lo": row.estimate.ci_low,
                    "ci_hi": row.estimate.ci_high,
                }
                for row in self.rows
            ],
            columns=["n", "tail", "censored_frac", "ci_lo", "ci_hi"],
        )


def decay_experiment(
    family_2d: ThresholdFamily,
    epsilon: float,
    n_grid: Sequence[int],
    trials: int,
    seed: int,
    *,
    window: int = 201,
    censor_cap: Optional[float] = None,
    confidence: Optional[float] = None,
    workers: Optional[int] = None,
) -> DecayTable:
    """Tail ``P(|K| >= n)`` of the origin cluster; censored trials count for every ``n``."""
    _require_subcritical(family_2d)
    window = _check_window(window)
    censor_cap = get_settings().censor_cap if censor_cap is None else float(censor_cap)
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", name="trials", value=trials)
    seeding = BernoulliSeeding(epsilon, seed)

    outcomes = run_trials(partial(_cluster_trial, family_2d, window, seeding), range(trials), workers)
    sizes = np.array([size for size, _ in outcomes], dtype=np.int64)
    censored = np.array([flag for _, flag in outcomes], dtype=bool)
    censored_fraction = float(censored.mean())
    if censored_fraction > censor_cap:
        raise WindowTooSmallError(
            f"{censored_fraction:.2%} of clusters touch the {window}x{window} window (cap {censor_cap:.2%})",
            censored_fraction=censored_fraction,
        )

    table = DecayTable(epsilon, window, trials, censored_fraction, float("nan"))
    for n in sorted(int(x) for x in n_grid):
        hits = int(np.count_nonzero((sizes >= n) | censored))
        estimate = ProbabilityEstimate.from_counts(hits, trials, confidence)
        table.rows.append(DecayRow(n, hits / trials, estimate))

    usable = [(row.n, math.log(row.tail)) for row in table.rows if row.tail > 0]
    if len(usable) >= 2:
        ns, logs = zip(*usable)
        table.slope = float(np.polyfit(ns, logs, 1)[0])
    else:
        table.warnings.append("fewer than two positive tail values; slope undefined")
    _logger.info(
        "decay family=%s eps=%s window=%d trials=%d censored=%.4f slope=%s",
        family_2d, epsilon, window, trials, censored_fraction, table.slope,
    )
    return table
