"""Update families: anisotropic threshold neighbourhoods and explicit rule sets.

A ``ThresholdFamily`` infects a site once at least ``r`` of its neighbours
``x + N`` are infected, where ``N`` holds ``±k e_i`` for ``1 <= k <= a_i``.
An ``ExplicitFamily`` lists its rules directly; the threshold family's
explicit form (every r-subset of ``N``) is only ever built as a test oracle.
"""

import math
import re
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from pathlib import Path
from typing import FrozenSet, Iterable, Sequence, Tuple, Union

import yaml

from ..exceptions import (
    FamilyLiteralError,
    InvalidDirectionError,
    InvalidParameterError,
    InvalidSpecError,
)

Vector = Tuple[int, ...]

# Largest number of rules ``ThresholdFamily.to_explicit`` will materialize
MAX_EXPLICIT_RULES = 200_000

_LITERAL_RE = re.compile(r"^\s*N\s*\[\s*([0-9,\s]+)\]\s*r\s*=\s*([0-9]+)\s*$")


def _dot(x: Sequence[int], u: Sequence[int]) -> int:
    return sum(xi * ui for xi, ui in zip(x, u))


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Radii ``(a_1, ..., a_d)`` of the anisotropic neighbourhood, sorted."""

    radii: Tuple[int, ...]

    def __post_init__(self) -> None:
        radii = tuple(int(a) for a in self.radii)
        if not radii:
            raise InvalidSpecError("A neighbourhood needs at least one radius")
        if any(a < 1 for a in radii):
            raise InvalidSpecError(f"Radii must be positive, got {radii}")
        if list(radii) != sorted(radii):
            raise InvalidSpecError(f"Radii must be non-decreasing, got {radii}")
        object.__setattr__(self, "radii", radii)

    @property
    def dims(self) -> int:
        return len(self.radii)

    @property
    def size(self) -> int:
        return 2 * sum(self.radii)

    def vectors(self) -> Tuple[Vector, ...]:
        """Neighbourhood vectors in a fixed order: axis by axis, +k before -k."""
        out = []
        for axis, radius in enumerate(self.radii):
            for k in range(1, radius + 1):
                for sign in (1, -1):
                    v = [0] * self.dims
                    v[axis] = sign * k
                    out.append(tuple(v))
        return tuple(out)


def neighborhood_vectors(spec: NeighborhoodSpec) -> FrozenSet[Vector]:
    """Return ``{±k e_i : 1 <= k <= a_i}``, a set of ``2 * sum(a_i)`` vectors."""
    return frozenset(spec.vectors())


@dataclass(frozen=True)
class ExplicitFamily:
    """An arbitrary finite update family given by its rules."""

    rules: Tuple[FrozenSet[Vector], ...]

    def __post_init__(self) -> None:
        rules = tuple(frozenset(tuple(int(x) for x in v) for v in rule) for rule in self.rules)
        if not rules:
            raise InvalidSpecError("An explicit family needs at least one rule")
        dims = None
        for rule in rules:
            if not rule:
                raise InvalidSpecError("Every rule must be nonempty")
            for v in rule:
                if dims is None:
                    dims = len(v)
                if len(v) != dims or dims == 0:
                    raise InvalidSpecError(f"Rule vectors must all have dimension {dims}")
                if not any(v):
                    raise InvalidSpecError("Rules may not contain the origin")
        object.__setattr__(self, "rules", rules)

    @property
    def dims(self) -> int:
        return len(next(iter(self.rules[0])))

    def offsets(self) -> Tuple[Vector, ...]:
        """All distinct vectors used by any rule, sorted."""
        return tuple(sorted(set().union(*self.rules)))


@dataclass(frozen=True)
class ThresholdFamily:
    """The family ``N_r^{a_1,...,a_d}``."""

    spec: NeighborhoodSpec
    r: int

    def __post_init__(self) -> None:
        r = int(self.r)
        if not 1 <= r <= self.spec.size:
            raise InvalidSpecError(
                f"Threshold r={r} outside [1, {self.spec.size}] for radii {self.spec.radii}"
            )
        object.__setattr__(self, "r", r)

    @classmethod
    def of(cls, *radii: int, r: int) -> "ThresholdFamily":
        return cls(NeighborhoodSpec(tuple(radii)), r)

    @property
    def dims(self) -> int:
        return self.spec.dims

    @property
    def radii(self) -> Tuple[int, ...]:
        return self.spec.radii

    @property
    def largest_radius(self) -> int:
        return self.spec.radii[-1]

    @property
    def s(self) -> int:
        """``r - c`` with ``c`` the largest radius."""
        return self.r - self.largest_radius

    @property
    def m(self) -> int:
        """``a + b + 1``, the threshold of the 2D cross-section family."""
        if self.dims < 2:
            raise InvalidSpecError("m is only defined for d >= 2")
        return self.spec.radii[0] + self.spec.radii[1] + 1

    def neighborhood(self) -> Tuple[Vector, ...]:
        return self.spec.vectors()

    def to_explicit(self) -> ExplicitFamily:
        """All r-subsets of the neighbourhood as explicit rules."""
        count = math.comb(self.spec.size, self.r)
        if count > MAX_EXPLICIT_RULES:
            raise InvalidParameterError(
                f"Explicit form of {format_family(self)} would have {count} rules",
                name="rules",
                value=count,
            )
        return ExplicitFamily(tuple(frozenset(c) for c in combinations(self.neighborhood(), self.r)))

    def __str__(self) -> str:
        return format_family(self)


Family = Union[ThresholdFamily, ExplicitFamily]


@dataclass(frozen=True)
class RationalDirection:
    """A direction in ``S^{d-1}`` as a gcd-reduced integer vector."""

    components: Tuple[int, ...] = field()

    def __post_init__(self) -> None:
        comps = tuple(int(x) for x in self.components)
        if not comps or not any(comps):
            raise InvalidDirectionError(f"Direction must be nonzero, got {comps}")
        g = reduce(math.gcd, (abs(x) for x in comps))
        object.__setattr__(self, "components", tuple(x // g for x in comps))

    @classmethod
    def of(cls, *components: int) -> "RationalDirection":
        return cls(tuple(components))

    @property
    def dims(self) -> int:
        return len(self.components)

    def in_open_halfspace(self, x: Sequence[int]) -> bool:
        """``<x, u> < 0``."""
        return _dot(x, self.components) < 0

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.components) + ")"


# ---------------------------------------------------------------------------
# Family literals and files
# ---------------------------------------------------------------------------

def parse_family(literal: str) -> ThresholdFamily:
    """Parse ``"N[a,b,c]r=R"`` (any number of radii)."""
    match = _LITERAL_RE.match(literal or "")
    if not match:
        raise FamilyLiteralError(
            f"Malformed family literal {literal!r}; expected e.g. 'N[1,2,4]r=6'",
            literal=literal,
        )
    parts = [p.strip() for p in match.group(1).split(",")]
    if any(p == "" for p in parts):
        raise FamilyLiteralError(f"Empty radius in family literal {literal!r}", literal=literal)
    radii = tuple(int(p) for p in parts)
    return ThresholdFamily(NeighborhoodSpec(radii), int(match.group(2)))


def format_family(family: ThresholdFamily) -> str:
    return "N[" + ",".join(str(a) for a in family.radii) + f"]r={family.r}"


def load_explicit_family(path: Union[str, Path]) -> ExplicitFamily:
    """Load ``rules: [[[1,0],[0,1]], ...]`` from a YAML file."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    rules: Iterable = data.get("rules") if isinstance(data, dict) else None
    if not rules:
        raise InvalidSpecError(f"No 'rules' list found in {path}")
    return ExplicitFamily(tuple(frozenset(tuple(v) for v in rule) for rule in rules))
