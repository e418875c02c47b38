"""Throughput computation for CSMA wireless networks with finite offered load.

The package pairs an exact stationary analysis of the idealized CSMA
network (independent-set partition function over the contention graph)
with the equivalent-access-intensity method for finite offered load, and
validates both against an event-driven simulator.
"""

from . import errors
from .eai import (
    EaiSolution,
    IterationRecord,
    LoadComparison,
    SolveRecord,
    compare_load_vs_saturated,
    compute_and_compare,
    reclassify_overshoot,
    solve_target_throughputs,
)
from .graph import (
    CommunicationResult,
    ContentionGraph,
    LinkState,
    StateSpace,
    build_graph,
    enumerate_independent_sets,
    format_graph_text,
    is_strongly_communicating,
    parse_graph_text,
    remove_zero_load_links,
    state_transition_neighbors,
)
from .icn import (
    StationaryDistribution,
    link_throughputs,
    partition_function,
    saturated_throughputs,
    state_weight,
    stationary_distribution,
)
from .netgen import (
    ErrorReport,
    random_contention_graph,
    throughput_error_report,
    unsaturated_load_recipe,
)
from .sim import (
    ReplicationSummary,
    SimConfig,
    SimResult,
    replicate,
    run_icn_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "build_graph",
    "parse_graph_text",
    "format_graph_text",
    "remove_zero_load_links",
    "enumerate_independent_sets",
    "state_transition_neighbors",
    "is_strongly_communicating",
    "ContentionGraph",
    "LinkState",
    "StateSpace",
    "CommunicationResult",
    "state_weight",
    "partition_function",
    "stationary_distribution",
    "link_throughputs",
    "saturated_throughputs",
    "StationaryDistribution",
    "compare_load_vs_saturated",
    "solve_target_throughputs",
    "reclassify_overshoot",
    "compute_and_compare",
    "LoadComparison",
    "SolveRecord",
    "IterationRecord",
    "EaiSolution",
    "SimConfig",
    "SimResult",
    "ReplicationSummary",
    "run_icn_simulation",
    "replicate",
    "random_contention_graph",
    "unsaturated_load_recipe",
    "throughput_error_report",
    "ErrorReport",
    "__version__",
]
