"""alpha_s / t_s, s-patterns and block-growth experiments."""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .engine import Box, Configuration, SubBlock, percolates
from .exceptions import (
    InconsistentTableError,
    InvalidDirectionError,
    InvalidParameterError,
    OutOfBoundsError,
)
from .family import ThresholdFamily
from .sampler import BernoulliSeeding, ProbabilityEstimate, bernoulli_grid, run_trials
from .utils import get_logger

_logger = get_logger(__name__)

CONDITIONING_LABEL = "fully-seeded-base conditional"

Probability = Union[float, Fraction]


# ---------------------------------------------------------------------------
# alpha_s and t_s
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaEntry:
    s: int
    t: int
    alpha: Fraction

    @property
    def is_integer(self) -> bool:
        return self.alpha.denominator == 1


def _t_closed_form(s: int) -> int:
    """``ceil((sqrt(9 + 8s) - 5) / 2)`` in integer arithmetic."""
    q = 9 + 8 * s
    root = math.isqrt(q)
    if root * root == q:
        return (root - 5) // 2
    return (root - 5) // 2 + 1


def _t_definition(s: int) -> int:
    """Largest ``t`` in ``[0, s-1]`` with ``sum_{i<=t}(s-i) / (t+2) < s-t``."""
    best = None
    for t in range(s):
        if Fraction(_column_sum(s, t), t + 2) < s - t:
            best = t
    if best is None:
        raise InconsistentTableError(f"No admissible t for s={s}")
    return best


def _column_sum(s: int, t: int) -> int:
    return sum(s - i for i in range(t + 1))


def alpha_t(s: int) -> AlphaEntry:
    """``t_s`` and ``alpha_s = (t+1)/(t+2) (s - t/2)`` as an exact rational."""
    if int(s) != s or s < 2:
        raise InvalidParameterError(f"s must be an integer >= 2, got {s}", name="s", value=s)
    s = int(s)
    t = _t_closed_form(s)
    t_def = _t_definition(s)
    alpha = Fraction(t + 1, t + 2) * (s - Fraction(t, 2))
    quotient = Fraction(_column_sum(s, t), t + 2)
    if t != t_def or alpha != quotient:
        raise InconsistentTableError(
            f"alpha_t({s}) disagrees: closed t={t}, definitional t={t_def}, alpha={alpha}, quotient={quotient}",
            entries=(t, t_def, alpha, quotient),
        )
    if not s - t - 1 <= alpha < s - t:
        raise InconsistentTableError(f"alpha_{s}={alpha} outside [s-t-1, s-t)", entries=(t, alpha))
    return AlphaEntry(s, t, alpha)


def alpha_is_integer(s: int) -> bool:
    return alpha_t(s).is_integer


def alpha_table(max_s: int) -> List[AlphaEntry]:
    if max_s < 2:
        raise InvalidParameterError(f"max_s must be >= 2, got {max_s}", name="max_s", value=max_s)
    return [alpha_t(s) for s in range(2, max_s + 1)]


def alpha_frame(entries: Sequence[AlphaEntry]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"s": e.s, "t": e.t, "alpha": str(e.alpha), "integer": e.is_integer} for e in entries],
        columns=["s", "t", "alpha", "integer"],
    )


# ---------------------------------------------------------------------------
# s-patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternHit:
    """Column ``i`` holds a full run of ``s - i`` cells at rows ``m_i (s-i) .. m_i (s-i) + s-i-1``."""

    s: int
    column_offsets: Tuple[int, ...]

    def rows(self, column: int) -> range:
        length = self.s - column
        start = self.column_offsets[column] * length
        return range(start, start + length)


def _strip_grid(strip: Union[Configuration, np.ndarray]) -> np.ndarray:
    grid = strip.infected if isinstance(strip, Configuration) else np.asarray(strip, dtype=bool)
    if grid.ndim != 2:
        raise InvalidParameterError(f"A strip must be two-dimensional, got shape {grid.shape}", name="strip")
    return grid


def find_s_pattern(strip: Union[Configuration, np.ndarray], s: int) -> Optional[PatternHit]:
    """Lexicographically smallest s-pattern in a ``(columns, k)`` strip, or None."""
    grid = _strip_grid(strip)
    t = alpha_t(s).t
    columns, k = grid.shape
    if columns < t + 1:
        raise InvalidParameterError(
            f"Strip has {columns} columns, an s-pattern for s={s} needs {t + 1}", name="strip", value=columns
        )
    offsets = []
    for i in range(t + 1):
        length = s - i
        slots = k // length
        if slots == 0:
            return None
        runs = grid[i, : slots * length].reshape(slots, length).all(axis=1)
        full = np.flatnonzero(runs)
        if full.size == 0:
            return None
        offsets.append(int(full[0]))
    return PatternHit(s, tuple(offsets))


def pattern_probability_exact(s: int, k: int, p: Probability) -> Probability:
    """``prod_{i<=t} (1 - (1 - p^(s-i))^floor(k/(s-i)))``; exact when ``p`` is a Fraction."""
    t = alpha_t(s).t
    if k < 0:
        raise InvalidParameterError(f"k must be nonnegative, got {k}", name="k", value=k)
    if isinstance(p, int):
        p = Fraction(p)
    result: Probability = Fraction(1) if isinstance(p, Fraction) else 1.0
    for i in range(t + 1):
        length = s - i
        result *= 1 - (1 - p**length) ** (k // length)
    return result


# ---------------------------------------------------------------------------
# Growth experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    base_extents: Tuple[int, ...]
    grown_extents: Tuple[int, ...]
    direction: int
    p: float
    estimate: ProbabilityEstimate
    label: str = CONDITIONING_LABEL
    pattern_bound: Optional[float] = None

    @property
    def increment(self) -> int:
        return self.grown_extents[self.direction] - self.base_extents[self.direction]

    def to_row(self) -> dict:
        row = {name: extent for name, extent in zip("lhw", self.base_extents)}
        row.update(
            {
                "dir": f"e{self.direction + 1}",
                "increment": self.increment,
                "p": self.p,
                "succ": self.estimate.successes,
                "trials": self.estimate.trials,
                "estimate": float(self.estimate.point),
                "ci_lo": self.estimate.ci_low,
                "ci_hi": self.estimate.ci_high,
                "pattern_bound": self.pattern_bound,
            }
        )
        return row


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}", name="p", value=p)
    return p


def parse_direction(direction: Union[int, str], dims: int) -> int:
    """Axis index from ``2`` or ``"e3"`` (1-based in the string form)."""
    if isinstance(direction, str):
        text = direction.strip().lower()
        if not text.startswith("e") or not text[1:].isdigit():
            raise InvalidDirectionError(f"Direction must look like 'e1'..'e{dims}', got {direction!r}")
        axis = int(text[1:]) - 1
    else:
        axis = int(direction)
    if not 0 <= axis < dims:
        raise InvalidDirectionError(f"Axis {direction!r} outside a {dims}-dimensional box")
    return axis


def _seeded_block_trial(family, box: Box, block: SubBlock, seeding: BernoulliSeeding, trial_index: int) -> bool:
    grid = bernoulli_grid(box, seeding.at(trial_index))
    grid[block.slices] = True
    return percolates(family, Configuration(box, grid))


def growth_probability_experiment(
    family: ThresholdFamily,
    base: Sequence[int],
    direction: Union[int, str],
    trials: int,
    seed: int,
    p: float,
    *,
    increment: int = 1,
    confidence: Optional[float] = None,
    workers: Optional[int] = None,
    coupled: bool = True,
) -> GrowthReport:
    """Estimate P(grown block internally filled | base block fully infected)."""
    base = tuple(int(x) for x in base)
    if len(base) != family.dims:
        raise InvalidParameterError(f"Base {base} is not {family.dims}-dimensional", name="base", value=base)
    c = family.largest_radius
    if any(x < c for x in base):
        raise InvalidParameterError(f"Base extents {base} must all be >= c={c}", name="base", value=base)
    axis = parse_direction(direction, family.dims)
    if increment < 0:
        raise InvalidParameterError("increment must be nonnegative", name="increment", value=increment)
    p = _check_p(p)
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", name="trials", value=trials)

    grown = list(base)
    grown[axis] += increment
    box = Box(tuple(grown))
    block = SubBlock((0,) * family.dims, base)
    worker = partial(_seeded_block_trial, family, box, block, BernoulliSeeding(p, seed, 0, coupled))
    successes = sum(run_trials(worker, range(trials), workers))
    estimate = ProbabilityEstimate.from_counts(successes, trials, confidence)

    bound = None
    if family.dims == 3 and axis == 2 and family.s >= 2:
        bound = float(pattern_probability_exact(family.s, base[1], p))
    _logger.info(
        "growth family=%s base=%s grown=%s p=%s successes=%d trials=%d",
        family, base, tuple(grown), p, successes, trials,
    )
    return GrowthReport(base, tuple(grown), axis, p, estimate, pattern_bound=bound)


def droplet_experiment(
    family: ThresholdFamily,
    droplet: Sequence[int],
    L: int,
    p: float,
    trials: int,
    seed: int,
    *,
    origin: Optional[Sequence[int]] = None,
    confidence: Optional[float] = None,
    workers: Optional[int] = None,
    coupled: bool = True,
) -> ProbabilityEstimate:
    """Seed ``droplet`` fully, Bernoulli(p) elsewhere, and estimate P(percolation of [L]^d)."""
    p = _check_p(p)
    box = Box.cube(int(L), family.dims)
    origin = tuple(origin) if origin is not None else (0,) * family.dims
    block = SubBlock(origin, tuple(droplet))
    if not block.fits(box):
        raise OutOfBoundsError(f"Droplet {tuple(droplet)} at {origin} does not fit in [{L}]^{family.dims}")
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", name="trials", value=trials)
    worker = partial(_seeded_block_trial, family, box, block, BernoulliSeeding(p, seed, 0, coupled))
    successes = sum(run_trials(worker, range(trials), workers))
    _logger.info("droplet family=%s droplet=%s L=%d p=%s successes=%d", family, block.extents, L, p, successes)
    return ProbabilityEstimate.from_counts(successes, trials, confidence)


def slab_droplet(family: ThresholdFamily, h: int, p: float) -> Tuple[int, int, int]:
    """``[a] x [h] x [ceil(h / p^a)]``."""
    if family.dims != 3:
        raise InvalidParameterError("Slab droplets are three-dimensional", name="family")
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"p must lie in (0, 1], got {p}", name="p", value=p)
    a = family.radii[0]
    return a, int(h), int(math.ceil(h / p**a))


def cubic_droplet(family: ThresholdFamily, l: int) -> Tuple[int, int, int]:
    """``[l] x [l^(s-1)] x [l^s]``."""
    s = family.s
    if family.dims != 3 or s < 1:
        raise InvalidParameterError("Cubic droplets need a 3D family with r > c", name="family")
    return int(l), int(l) ** (s - 1), int(l) ** s

