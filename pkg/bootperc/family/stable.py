"""Stable directions, the symbolic stable set and the criticality class."""

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Tuple

from ..exceptions import InvalidDirectionError, NotApplicableError
from .neighborhood import (
    ExplicitFamily,
    Family,
    NeighborhoodSpec,
    RationalDirection,
    ThresholdFamily,
)


class Criticality(Enum):
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"


class StableCase(Enum):
    AXES_ONLY = "AXES_ONLY"
    E3_PLUS_CIRCLE3 = "E3_PLUS_CIRCLE3"
    CIRCLES_23 = "CIRCLES_23"
    CIRCLES_123 = "CIRCLES_123"
    ALL_SPHERE = "ALL_SPHERE"
    EMPTY = "EMPTY"
    # supercritical range without a closed form: only probe results are known
    PROBED = "PROBED"


def is_stable_direction(family: Family, u: RationalDirection) -> bool:
    """True iff no rule of ``family`` lies in the open half-space ``<x, u> < 0``."""
    if u.dims != family.dims:
        raise InvalidDirectionError(
            f"Direction {u} has dimension {u.dims}, family has {family.dims}"
        )
    if isinstance(family, ThresholdFamily):
        inside = sum(1 for x in family.neighborhood() if u.in_open_halfspace(x))
        return inside < family.r
    return not any(all(u.in_open_halfspace(x) for x in rule) for rule in family.rules)


def probe_directions(dims: int) -> Tuple[RationalDirection, ...]:
    """The ``3^d - 1`` directions with every component in ``{-1, 0, 1}``."""
    return tuple(
        RationalDirection(v) for v in product((-1, 0, 1), repeat=dims) if any(v)
    )


def _zero_axes(u: RationalDirection) -> Tuple[int, ...]:
    return tuple(i for i, x in enumerate(u.components) if x == 0)


@dataclass(frozen=True)
class StableSetDescription:
    """Symbolic stable set of an anisotropic family.

    Circles are ``S1_i = {u : u_i = 0}`` with axes numbered from 1.
    """

    case: StableCase
    criticality: Criticality
    dims: int = 3
    stable_probes: Tuple[RationalDirection, ...] = ()

    def contains(self, u: RationalDirection) -> bool:
        if u.dims != self.dims:
            raise InvalidDirectionError(f"Direction {u} is not {self.dims}-dimensional")
        zeros = _zero_axes(u)
        is_axis = len(zeros) == self.dims - 1
        last = self.dims - 1
        if self.case is StableCase.AXES_ONLY:
            return is_axis
        if self.case is StableCase.E3_PLUS_CIRCLE3:
            return last in zeros or (is_axis and u.components[last] != 0)
        if self.case is StableCase.CIRCLES_23:
            return 1 in zeros or 2 in zeros
        if self.case is StableCase.CIRCLES_123:
            return bool(zeros)
        if self.case is StableCase.ALL_SPHERE:
            return True
        if self.case is StableCase.EMPTY:
            return False
        return u in self.stable_probes

    @property
    def label(self) -> str:
        if self.case is StableCase.AXES_ONLY:
            return "{" + ", ".join(f"±e{i + 1}" for i in range(self.dims)) + "}"
        if self.case is StableCase.E3_PLUS_CIRCLE3:
            return "{±e3} ∪ S1_3"
        if self.case is StableCase.CIRCLES_23:
            return "S1_2 ∪ S1_3"
        if self.case is StableCase.CIRCLES_123:
            return "S1_1 ∪ S1_2 ∪ S1_3"
        if self.case is StableCase.ALL_SPHERE:
            return f"S{self.dims - 1}"
        if self.case is StableCase.EMPTY:
            return "∅"
        return "probed {" + ", ".join(str(u) for u in self.stable_probes) + "}"

    @property
    def is_critical(self) -> bool:
        return self.criticality is Criticality.CRITICAL


def _check_radii(*radii: int) -> None:
    # NeighborhoodSpec raises InvalidSpecError on unsorted radii
    NeighborhoodSpec(tuple(radii))


def _probed(family: ThresholdFamily) -> StableSetDescription:
    a = family.radii[0]
    if family.r <= a:
        # every nonzero u has some axis i with a_i >= r vectors in H_u
        return StableSetDescription(StableCase.EMPTY, Criticality.SUPERCRITICAL, family.dims)
    stable = tuple(u for u in probe_directions(family.dims) if is_stable_direction(family, u))
    return StableSetDescription(
        StableCase.PROBED, Criticality.SUPERCRITICAL, family.dims, stable_probes=stable
    )


def stable_set_symbolic(a: int, b: int, c: int, r: int) -> StableSetDescription:
    """Closed-form stable set of ``N_r^{a,b,c}``."""
    _check_radii(a, b, c)
    family = ThresholdFamily(NeighborhoodSpec((a, b, c)), r)
    if r <= c:
        return _probed(family)
    if r > a + b + c:
        return StableSetDescription(StableCase.ALL_SPHERE, Criticality.SUBCRITICAL)
    if r <= a + b:
        case = StableCase.AXES_ONLY
    elif r <= a + c:
        case = StableCase.E3_PLUS_CIRCLE3
    elif r <= b + c:
        case = StableCase.CIRCLES_23
    else:
        case = StableCase.CIRCLES_123
    return StableSetDescription(case, Criticality.CRITICAL)


def stable_set_symbolic_2d(a: int, b: int, r: int) -> StableSetDescription:
    """Stable set of ``N_r^{a,b}``: critical iff ``b < r <= a + b``."""
    _check_radii(a, b)
    family = ThresholdFamily(NeighborhoodSpec((a, b)), r)
    if r <= b:
        return _probed(family)
    if r > a + b:
        return StableSetDescription(StableCase.ALL_SPHERE, Criticality.SUBCRITICAL, dims=2)
    return StableSetDescription(StableCase.AXES_ONLY, Criticality.CRITICAL, dims=2)


def classify(family: Family) -> StableSetDescription:
    """Stable set and criticality class of a two- or three-dimensional threshold family."""
    if isinstance(family, ExplicitFamily):
        raise NotApplicableError("Classification is only available for threshold families")
    if family.dims == 3:
        return stable_set_symbolic(*family.radii, family.r)
    if family.dims == 2:
        return stable_set_symbolic_2d(*family.radii, family.r)
    raise NotApplicableError(f"Classification is only available for d in {{2, 3}}, got d={family.dims}")


def criticality(family: Family) -> Criticality:
    return classify(family).criticality


def require(family: Family, *allowed: Criticality) -> StableSetDescription:
    """Classify ``family`` and raise ``NotApplicableError`` unless its class is allowed."""
    description = classify(family)
    if description.criticality not in allowed:
        names = ", ".join(c.value for c in allowed)
        raise NotApplicableError(
            f"{family} is {description.criticality.value}; expected {names}",
            criticality=description.criticality.value,
        )
    return description
