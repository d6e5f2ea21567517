"""Spatiotemporal graphs of evolving geographic objects, mined with constraint solving."""

from .errors import STGError
from .evolution import ChangeEvent, FrequencyTable, classify_changes, mine_frequent
from .graph import (
    CONTINUATION,
    DERIVATION,
    ConstructionConfig,
    Filiation,
    FiliationMode,
    Spatial,
    SpatioTemporal,
    STEdge,
    STGraph,
    STNode,
    TimeStamp,
    construct_stg,
)
from .identify import (
    Constraint,
    Delta,
    DynCspState,
    Nogood,
    ObjectTemplate,
    PartVar,
    RelationRule,
    create_nogood,
    delta_from_snapshot,
    dyn_solve,
    init_state,
    repair_sol,
    solve_static,
)
from .matching import Match, MatchNetwork, brute_force_match, match_all_anchors, modelize_csp, resolve_csp
from .patterns import Pattern, PatternEdge, PatternVertex, catalog, parse_pattern, validate_pattern
from .relations import Near, Rel, Region, Snapshot, near, overlap_ratio, relation

__version__ = "0.1.0"
