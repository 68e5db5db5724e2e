"""Papillon: butterfly networks on a ring with asymptotically optimal greedy routing."""

from .analysis import (
    LoadProfile,
    StatsSummary,
    all_pairs_stats,
    bfs_shortest_paths,
    classify_phases,
    compare_strategies,
    edge_load_profile,
    span_contains,
)
from .errors import (
    BudgetExceeded,
    InvariantViolation,
    PapillonError,
    ParameterError,
    RoutingError,
    SizeError,
)
from .ring_metrics import delta_absolute, delta_clockwise, delta_xor
from .routing import (
    DigitDecomposition,
    Route,
    Strategy,
    StrategyConfig,
    congestion_free_absolute,
    congestion_free_clockwise,
    decompose_balanced_absolute,
    decompose_clockwise,
    greedy_route,
    hypercubic_absolute,
    hypercubic_clockwise,
    route,
    xor_greedy,
)
from .topology import (
    EdgeKind,
    Family,
    Topology,
    TopologyParams,
    build,
    build_absolute,
    build_chord,
    build_clockwise,
    build_xor,
    level_ring,
    level_xor,
)

__version__ = "0.1.0"
