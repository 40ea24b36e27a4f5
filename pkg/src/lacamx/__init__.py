"""lacamx: anytime multi-agent pathfinding on four-connected grids.

A lazy-constraint configuration search with PIBT successor generation plus
five quality boosters: non-deterministic node extraction, scattered-path
guidance, Monte-Carlo successor sampling, dynamic incorporation of external
solutions, and concurrent refiners (large-neighborhood SIPP replanning and
recursive sub-searches).
"""

from . import backend
from .graphs import (
    UNREACHABLE,
    Config,
    DistTable,
    GridMap,
    Instance,
    Solution,
    UnsolvableInstanceError,
    Violation,
    ViolationKind,
    connected,
    cost_edge,
    dist_to_goal,
    flowtime,
    lower_bound,
    neighbors,
    sum_of_loss,
    validate_solution,
)
from .pibt import (
    ConstraintSet,
    PreferenceContext,
    PrioritySet,
    apply_swap_heuristic,
    build_preferences,
    generate,
    update_priorities,
)
from .scatter import CollisionIndex, ScatterPaths, compute_scatter, count_collisions, replan_single
from .search import (
    SearchParams,
    SearchResult,
    SolveStatus,
    backtrack,
    incorporate_solution,
    search,
)
from .montecarlo import SampleBatch, mc_generate, sample_batch
from .solver import AnytimeRecord, RunResult, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "backend",
    "UNREACHABLE",
    "Config",
    "DistTable",
    "GridMap",
    "Instance",
    "Solution",
    "UnsolvableInstanceError",
    "Violation",
    "ViolationKind",
    "connected",
    "cost_edge",
    "dist_to_goal",
    "flowtime",
    "lower_bound",
    "neighbors",
    "sum_of_loss",
    "validate_solution",
    "ConstraintSet",
    "PreferenceContext",
    "PrioritySet",
    "apply_swap_heuristic",
    "build_preferences",
    "generate",
    "update_priorities",
    "CollisionIndex",
    "ScatterPaths",
    "compute_scatter",
    "count_collisions",
    "replan_single",
    "SearchParams",
    "SearchResult",
    "SolveStatus",
    "backtrack",
    "incorporate_solution",
    "search",
    "SampleBatch",
    "mc_generate",
    "sample_batch",
    "AnytimeRecord",
    "RunResult",
    "SolverConfig",
    "solve",
]
