"""Update families, stable sets and scaling predictions."""

from .neighborhood import (
    ExplicitFamily,
    Family,
    NeighborhoodSpec,
    RationalDirection,
    ThresholdFamily,
    format_family,
    load_explicit_family,
    neighborhood_vectors,
    parse_family,
)
from .stable import (
    Criticality,
    StableCase,
    StableSetDescription,
    classify,
    criticality,
    is_stable_direction,
    probe_directions,
    require,
    stable_set_symbolic,
    stable_set_symbolic_2d,
)
from .scaling import (
    OrderStatus,
    ScalingOrder,
    predicted_log_lc_order,
    predicted_log_lc_order_2d,
    predicted_order,
)
