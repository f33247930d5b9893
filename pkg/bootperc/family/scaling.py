"""Predicted order of ``log L_c`` for critical anisotropic families.

The descriptor ``(exponent e, log power k, level)`` stands for
``log L_c = Theta(p^-e (log 1/p)^k)`` at level 1 and for the same
expression applied to ``log log L_c`` at level 2.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from ..exceptions import NotApplicableError
from .neighborhood import Family, NeighborhoodSpec, ThresholdFamily
from .stable import Criticality, classify


class OrderStatus(Enum):
    THEOREM = "theorem"
    UPPER_BOUND_ONLY = "upper-bound-only"
    CONJECTURE = "conjecture"


@dataclass(frozen=True)
class ScalingOrder:
    exponent: Fraction
    log_power: Fraction
    level: int
    status: OrderStatus
    regime: str

    def describe(self) -> str:
        expr = f"p^-({self.exponent})"
        if self.log_power:
            expr += f" (log 1/p)^({self.log_power})"
        lhs = "log L_c" if self.level == 1 else "log log L_c"
        bound = "O" if self.status is OrderStatus.UPPER_BOUND_ONLY else "Theta"
        return f"{lhs} = {bound}({expr}) [{self.status.value}; {self.regime}]"


def _order(e, k, status: OrderStatus, regime: str, level: int = 1) -> ScalingOrder:
    return ScalingOrder(Fraction(e), Fraction(k), level, status, regime)


def _require_critical(family: ThresholdFamily) -> None:
    description = classify(family)
    if description.criticality is not Criticality.CRITICAL:
        raise NotApplicableError(
            f"No scaling prediction for {description.criticality.value} family {family}",
            criticality=description.criticality.value,
        )


def predicted_log_lc_order(a: int, b: int, c: int, r: int) -> ScalingOrder:
    """Predicted order of the critical length of ``N_r^{a,b,c}``."""
    from ..growth import alpha_t

    _require_critical(ThresholdFamily(NeighborhoodSpec((a, b, c)), r))
    s = r - c

    if r > b + c:
        return _order(
            r - (b + c), 0 if b == a else 2, OrderStatus.THEOREM,
            "b+c < r <= a+b+c", level=2,
        )

    if c >= a + b:
        if c == a + b:
            return _order(s, 0, OrderStatus.THEOREM, "c = a+b")
        return _order(s, 2, OrderStatus.THEOREM, "c > a+b")

    if r > a + c:
        if c == b:
            alpha_a = Fraction(1, 2) if a == 1 else alpha_t(a).alpha
            return _order(r - c - a + alpha_a, 0, OrderStatus.CONJECTURE, "c = b > a, a+c < r <= b+c")
        return _order(r - a - b, 0, OrderStatus.CONJECTURE, "b < c < a+b, a+c < r <= b+c")

    # c < a+b and c < r <= a+c from here on
    half = Fraction(s, 2)
    if s == 1 or (s == 2 and c != a + b - 1):
        if c == b == a:
            return _order(half, 0, OrderStatus.THEOREM, "c = b = a")
        if c == b:
            return _order(half, Fraction(1, 2), OrderStatus.THEOREM, "c = b > a")
        return _order(half, Fraction(3, 2), OrderStatus.THEOREM, "b < c <= a+b-s")

    entry = alpha_t(s)
    if a + b - s < c:
        if r < a + b + entry.alpha:
            return _order(entry.alpha, 2, OrderStatus.UPPER_BOUND_ONLY, "a+b-s < c < a+b, r < a+b+alpha_s")
        return _order(r - (a + b), 2, OrderStatus.UPPER_BOUND_ONLY, "a+b-s < c < a+b, r >= a+b+alpha_s")

    t = entry.t
    if c == b == a:
        return _order(entry.alpha, 0, OrderStatus.UPPER_BOUND_ONLY, "c = b = a")
    if c == b:
        return _order(entry.alpha, Fraction(t + 1, t + 2), OrderStatus.UPPER_BOUND_ONLY, "c = b > a")
    return _order(entry.alpha, Fraction(t + 3, t + 2), OrderStatus.UPPER_BOUND_ONLY, "b < c <= a+b-s")


def predicted_log_lc_order_2d(a: int, b: int, r: int) -> ScalingOrder:
    """Predicted order for ``N_r^{a,b}``, critical when ``b < r <= a+b``."""
    _require_critical(ThresholdFamily(NeighborhoodSpec((a, b)), r))
    if a == b:
        return _order(r - b, 0, OrderStatus.THEOREM, "b = a")
    return _order(r - b, 2, OrderStatus.THEOREM, "b > a")


def predicted_order(family: Family) -> ScalingOrder:
    if not isinstance(family, ThresholdFamily):
        raise NotApplicableError("Scaling predictions need a threshold family")
    if family.dims == 3:
        return predicted_log_lc_order(*family.radii, family.r)
    if family.dims == 2:
        return predicted_log_lc_order_2d(*family.radii, family.r)
    raise NotApplicableError(f"No scaling prediction for d={family.dims}")
