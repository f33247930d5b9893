"""Seeded Bernoulli configurations, percolation probabilities and L_c search.

Trial ``i`` of a run with seed ``s`` draws its uniforms from a Philox stream
keyed by ``(s, i)``; the uniform of cell ``j`` is the ``j``-th draw.  With
coupled sampling the key ignores ``p``, so the same cell field thresholded
at ``p1 < p2`` gives nested seeds.  Results are combined in trial order, so
the worker count never changes an estimate.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from itertools import product
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
import pandas as pd
import scipy.stats

from .config import get_settings
from .engine import Boundary, Box, Configuration, percolates
from .exceptions import InvalidParameterError
from .family import Criticality, Family, ScalingOrder, predicted_order, require
from .utils import get_logger

_logger = get_logger(__name__)

MASK64 = (1 << 64) - 1
# Exhaustive enumeration over 2**volume subsets is refused above this volume
MAX_EXACT_VOLUME = 20

T = TypeVar("T")
R = TypeVar("R")


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliSeeding:
    p: float
    seed: int
    trial_index: int = 0
    coupled: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= float(self.p) <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {self.p}", name="p", value=self.p)
        if self.trial_index < 0:
            raise InvalidParameterError("trial_index must be nonnegative", name="trial_index", value=self.trial_index)

    def at(self, trial_index: int) -> "BernoulliSeeding":
        return BernoulliSeeding(self.p, self.seed, trial_index, self.coupled)


def uniform_field(volume: int, seeding: BernoulliSeeding) -> np.ndarray:
    """``volume`` uniforms in [0, 1) for one trial."""
    if seeding.coupled:
        key: Union[int, np.ndarray] = (int(seeding.trial_index) << 64) | (int(seeding.seed) & MASK64)
    else:
        entropy = [int(seeding.seed) & MASK64, int(seeding.trial_index), int(float(seeding.p) * 2**53)]
        key = np.random.SeedSequence(entropy).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random(volume)


def bernoulli_grid(box: Box, seeding: BernoulliSeeding) -> np.ndarray:
    """Boolean grid with each cell infected iff its uniform is below ``p``."""
    return (uniform_field(box.volume, seeding) < float(seeding.p)).reshape(box.dims)


def sample_configuration(box: Box, seeding: BernoulliSeeding) -> Configuration:
    """Bernoulli(p) configuration; ``p`` must lie in (0, 1]."""
    if not 0.0 < float(seeding.p) <= 1.0:
        raise InvalidParameterError(f"p must lie in (0, 1], got {seeding.p}", name="p", value=seeding.p)
    return Configuration(box, bernoulli_grid(box, seeding))


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------

def _z(confidence: float) -> float:
    return float(scipy.stats.norm.ppf(0.5 + confidence / 2.0))


def wilson_interval(successes: int, trials: int, confidence: float) -> Tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    z = _z(confidence)
    n = float(trials)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n))
    low = min(max(0.0, center - half), phat)
    high = max(min(1.0, center + half), phat)
    return low, high


@dataclass(frozen=True)
class ProbabilityEstimate:
    successes: int
    trials: int
    point: Fraction
    ci_low: float
    ci_high: float
    confidence: float = 0.95

    @classmethod
    def from_counts(cls, successes: int, trials: int, confidence: Optional[float] = None) -> "ProbabilityEstimate":
        if trials < 1 or not 0 <= successes <= trials:
            raise InvalidParameterError(
                f"Need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}", name="trials"
            )
        confidence = get_settings().confidence if confidence is None else float(confidence)
        if not 0.0 < confidence < 1.0:
            raise InvalidParameterError(f"confidence must lie in (0, 1), got {confidence}", name="confidence")
        low, high = wilson_interval(successes, trials, confidence)
        return cls(successes, trials, Fraction(successes, trials), low, high, confidence)

    @property
    def value(self) -> float:
        return float(self.point)

    def contains(self, probability: float) -> bool:
        return self.ci_low <= float(probability) <= self.ci_high


# ---------------------------------------------------------------------------
# Trial fan-out
# ---------------------------------------------------------------------------

def run_trials(worker: Callable[[T], R], tasks: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply ``worker`` to every task; results come back in task order."""
    workers = get_settings().workers if workers is None else int(workers)
    tasks = list(tasks)
    if workers <= 1 or len(tasks) < 2:
        return [worker(task) for task in tasks]
    chunksize = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=chunksize))


def _validate_trials(trials: int) -> int:
    trials = int(trials)
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", name="trials", value=trials)
    return trials


def _percolation_trial(family: Family, box: Box, seeding: BernoulliSeeding, trial_index: int) -> bool:
    return percolates(family, sample_configuration(box, seeding.at(trial_index)))


def percolation_probability(
    family: Family,
    L: int,
    p: float,
    trials: int,
    seed: int,
    *,
    confidence: Optional[float] = None,
    workers: Optional[int] = None,
    coupled: bool = True,
    boundary: Boundary = Boundary.CLOSED,
) -> ProbabilityEstimate:
    """Monte Carlo estimate of ``P_p([A] = [L]^d)``."""
    trials = _validate_trials(trials)
    seeding = BernoulliSeeding(p, seed, 0, coupled)
    if not 0.0 < float(p) <= 1.0:
        raise InvalidParameterError(f"p must lie in (0, 1], got {p}", name="p", value=p)
    box = Box.cube(int(L), family.dims, boundary)
    worker = partial(_percolation_trial, family, box, seeding)
    successes = sum(run_trials(worker, range(trials), workers))
    estimate = ProbabilityEstimate.from_counts(successes, trials, confidence)
    _logger.info("percolation family=%s L=%d p=%s successes=%d trials=%d", family, L, p, successes, trials)
    return estimate


def exact_percolation_probability(
    family: Family, L: int, p: Union[float, Fraction], boundary: Boundary = Boundary.CLOSED
) -> Union[float, Fraction]:
    """Sum of ``p^|A| (1-p)^(V-|A|)`` over all percolating ``A``; exact for Fraction ``p``."""
    box = Box.cube(int(L), family.dims, boundary)
    volume = box.volume
    if volume > MAX_EXACT_VOLUME:
        raise InvalidParameterError(
            f"Exhaustive enumeration over 2**{volume} subsets refused", name="L", value=L
        )
    by_size = [0] * (volume + 1)
    for bits in product((False, True), repeat=volume):
        grid = np.array(bits, dtype=bool).reshape(box.dims)
        if percolates(family, Configuration(box, grid)):
            by_size[sum(bits)] += 1
    q = 1 - p
    return sum(count * p**k * q ** (volume - k) for k, count in enumerate(by_size) if count)


# ---------------------------------------------------------------------------
# Critical length
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LcEstimate:
    """Bracket ``(L_lower, L_upper]`` around ``L_c``.

    ``L_lower = 0`` means the first probe already met the target.
    ``L_upper`` is None when ``L_max`` was reached without meeting it.
    """

    p: float
    target: float
    L_lower: int
    L_upper: Optional[int]
    probe_trace: Tuple[Tuple[int, ProbabilityEstimate], ...]
    warnings: Tuple[str, ...] = ()
    monotone: bool = True

    @property
    def bracketed(self) -> bool:
        return self.L_upper is not None


def _monotone_warnings(trace: Sequence[Tuple[int, ProbabilityEstimate]]) -> List[str]:
    warnings = []
    ordered = sorted(trace, key=lambda item: item[0])
    for (l1, e1), (l2, e2) in zip(ordered, ordered[1:]):
        if e2.point < e1.point:
            warnings.append(
                f"non-monotone estimates: P(L={l1})={float(e1.point):.4f} > P(L={l2})={float(e2.point):.4f}"
            )
    return warnings


def critical_length(
    family: Family,
    p: float,
    target: Optional[float] = None,
    trials: int = 1000,
    seed: int = 0,
    L_max: Optional[int] = None,
    *,
    rel_width: float = 0.0,
    confidence: Optional[float] = None,
    workers: Optional[int] = None,
    coupled: bool = True,
) -> LcEstimate:
    """Doubling then bisection for ``min{L : P_p([A] = [L]^d) >= target}``."""
    settings = get_settings()
    require(family, Criticality.CRITICAL, Criticality.SUPERCRITICAL)
    target = settings.target if target is None else float(target)
    L_max = settings.lmax if L_max is None else int(L_max)
    if not 0.0 < target <= 1.0:
        raise InvalidParameterError(f"target must lie in (0, 1], got {target}", name="target", value=target)
    if L_max < 1:
        raise InvalidParameterError(f"L_max must be positive, got {L_max}", name="L_max", value=L_max)
    if rel_width < 0:
        raise InvalidParameterError("rel_width must be nonnegative", name="rel_width", value=rel_width)

    trace: List[Tuple[int, ProbabilityEstimate]] = []

    def meets(L: int) -> bool:
        estimate = percolation_probability(
            family, L, p, trials, seed, confidence=confidence, workers=workers, coupled=coupled
        )
        trace.append((L, estimate))
        _logger.info("lc probe family=%s p=%s L=%d P=%.4f", family, p, L, float(estimate.point))
        return estimate.point >= target

    lower, upper = 0, None
    L = 1
    while True:
        if meets(L):
            upper = L
            break
        lower = L
        if L >= L_max:
            break
        L = min(2 * L, L_max)

    warnings: List[str] = []
    if upper is None:
        warnings.append(f"L_max={L_max} reached before P >= {target}; only a lower bound is known")
        _logger.warning("lc family=%s p=%s: %s", family, p, warnings[-1])
    else:
        while upper - lower > 1 and (rel_width == 0.0 or upper - lower > rel_width * upper):
            mid = (lower + upper) // 2
            if meets(mid):
                upper = mid
            else:
                lower = mid

    monotonic = _monotone_warnings(trace)
    for message in monotonic:
        _logger.warning("lc family=%s p=%s: %s", family, p, message)
    warnings.extend(monotonic)
    return LcEstimate(
        p=float(p),
        target=target,
        L_lower=lower,
        L_upper=upper,
        probe_trace=tuple(trace),
        warnings=tuple(warnings),
        monotone=not monotonic,
    )


# ---------------------------------------------------------------------------
# Scaling diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingRow:
    p: float
    L_lower: int
    L_upper: Optional[int]
    log_L_lower: float
    log_L_upper: float
    order: ScalingOrder
    ratio: float


@dataclass
class ScalingTable:
    order: Optional[ScalingOrder]
    rows: List[ScalingRow] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        columns = [
            "p", "L_lower", "L_upper", "log_L_lower", "log_L_upper",
            "exponent", "log_power", "level", "status", "ratio",
        ]
        records = [
            {
                "p": row.p,
                "L_lower": row.L_lower,
                "L_upper": row.L_upper,
                "log_L_lower": row.log_L_lower,
                "log_L_upper": row.log_L_upper,
                "exponent": str(row.order.exponent),
                "log_power": str(row.order.log_power),
                "level": row.order.level,
                "status": row.order.status.value,
                "ratio": row.ratio,
            }
            for row in self.rows
        ]
        return pd.DataFrame.from_records(records, columns=columns)


def scaling_ratio(L: int, p: float, order: ScalingOrder) -> float:
    """``log L / (p^-e (log 1/p)^k)``, with ``log log L`` at level 2; NaN when undefined."""
    if L is None or L < 1:
        return float("nan")
    value = math.log(L)
    if order.level == 2:
        value = math.log(value) if value > 0 else float("nan")
    scale = (1.0 / p) ** float(order.exponent) * math.log(1.0 / p) ** float(order.log_power)
    if not math.isfinite(value) or scale <= 0:
        return float("nan")
    return value / scale


def scaling_probe(
    family: Family,
    p_list: Sequence[float],
    trials: int,
    seed: int,
    *,
    target: Optional[float] = None,
    L_max: Optional[int] = None,
    rel_width: float = 0.0,
    workers: Optional[int] = None,
) -> ScalingTable:
    """Critical-length brackets against the predicted order, one row per ``p``."""
    order = predicted_order(family)
    p_list = [float(p) for p in p_list]
    if any(b >= a for a, b in zip(p_list, p_list[1:])):
        raise InvalidParameterError("p_list must be strictly decreasing", name="p_list", value=p_list)
    if any(not 0.0 < p < 1.0 for p in p_list):
        raise InvalidParameterError("every p must lie in (0, 1)", name="p_list", value=p_list)

    table = ScalingTable(order=order)
    for p in p_list:
        lc = critical_length(
            family, p, target, trials, seed, L_max, rel_width=rel_width, workers=workers
        )
        L_ref = lc.L_upper if lc.L_upper is not None else lc.L_lower
        ratio = scaling_ratio(L_ref, p, order)
        table.warnings.extend(f"p={p}: {w}" for w in lc.warnings)
        if not (math.isfinite(ratio) and ratio > 0):
            table.warnings.append(f"p={p}: ratio undefined for L={L_ref}")
        table.rows.append(
            ScalingRow(
                p=p,
                L_lower=lc.L_lower,
                L_upper=lc.L_upper,
                log_L_lower=math.log(lc.L_lower) if lc.L_lower > 0 else float("-inf"),
                log_L_upper=math.log(lc.L_upper) if lc.L_upper else float("nan"),
                order=order,
                ratio=ratio,
            )
        )
    return table
