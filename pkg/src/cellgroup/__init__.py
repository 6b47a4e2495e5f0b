"""Generalized grouping for cellular manufacturing.

Pick one process route per part, group the picked routes into families with
an exact side-constrained flow model, then form machine cells exactly (QAP)
or heuristically.
"""

from importlib import resources
from pathlib import Path

from .cells import (
    CellConfig,
    CellSolution,
    heuristic_from_usage,
    heuristic_step1_merge_families,
    heuristic_step2_assign_machines,
    heuristic_step3_merge_cells,
    run_heuristic,
    same_grouping,
    solve_qap,
    usage_factors,
)
from .core import Instance, machines_of, validate_instance
from .dissimilarity import (
    DissimilarityMatrix,
    dissimilarity_matrix,
    family_cyclic_dissimilarity,
    route_dissimilarity,
)
from .family import (
    FamilySolution,
    FlowNetwork,
    FlowSolution,
    brute_force_families,
    build_network,
    extract_cycles,
    flow_violations,
    solve_family_formation,
    to_dimacs,
)
from .instance_file import format_instance, parse_instance, read_instance
from .reporting import GroupingReport, build_report, count_exceptional_elements, render_table

__version__ = "0.1.0"


def bundled_instance_path(name: str) -> Path:
    """Path of a bundled instance file, e.g. ``"example1.cms"``."""
    return Path(str(resources.files(__package__) / "data" / name))
