from .network import (
    ArcKind,
    FlowArc,
    FlowNetwork,
    FlowNode,
    NodeKind,
    build_network,
    to_dimacs,
)
from .oracle import brute_force_families
from .solver import (
    FamilySolution,
    FlowSolution,
    extract_cycles,
    flow_from_cycles,
    flow_violations,
    solve_family_formation,
)

__all__ = [
    "ArcKind",
    "FamilySolution",
    "FlowArc",
    "FlowNetwork",
    "FlowNode",
    "FlowSolution",
    "NodeKind",
    "brute_force_families",
    "build_network",
    "extract_cycles",
    "flow_from_cycles",
    "flow_violations",
    "solve_family_formation",
    "to_dimacs",
]
