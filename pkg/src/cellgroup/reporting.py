"""Block-diagonal views of a grouping and its exceptional elements."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cells import CellSolution
from .core import Instance
from .dissimilarity import DissimilarityMatrix, dissimilarity_matrix, family_cyclic_dissimilarity
from .errors import InconsistentSolutionsError
from .family.solver import FamilySolution


@dataclass(frozen=True, eq=False)
class GroupingReport:
    """Selected routes against machines, rearranged cell by cell.

    ``row_blocks``/``column_blocks`` give the per-cell row and column counts
    so renderers can draw block boundaries.
    """

    row_order: tuple[int, ...]
    column_order: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    row_blocks: tuple[int, ...]
    column_blocks: tuple[int, ...]
    exceptional_elements: int
    utilization: int
    objective: int
    family_dissimilarities: tuple[int, ...]
    families: tuple[tuple[int, ...], ...]
    selected_route: dict[int, int]
    cells: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    row_labels: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "families": [list(f) for f in self.families],
            "selected_route": {str(k): i for k, i in self.selected_route.items()},
            "cells": [{"machines": list(ms), "families": list(fs)} for ms, fs in self.cells],
            "objective": self.objective,
            "utilization": self.utilization,
            "exceptional_elements": self.exceptional_elements,
        }


def _check_consistent(families: FamilySolution, cells: CellSolution) -> None:
    known = set(range(1, families.family_count + 1))
    assigned = set(cells.family_cell)
    if assigned - known:
        raise InconsistentSolutionsError(
            f"cells refer to families {sorted(assigned - known)} that have no routes"
        )
    if known - assigned:
        raise InconsistentSolutionsError(f"families {sorted(known - assigned)} have no cell")
    if any(len(f) == 0 for f in families.families):
        raise InconsistentSolutionsError("a family has no routes")


def count_exceptional_elements(
    instance: Instance, families: FamilySolution, cells: CellSolution
) -> int:
    """Selected-route/machine requirements that fall outside the route's cell."""
    _check_consistent(families, cells)
    count = 0
    for r, family in enumerate(families.families, start=1):
        home = cells.family_cell[r]
        for i in family:
            for m in np.flatnonzero(instance.incidence[i - 1]):
                if cells.machine_cell[int(m) + 1] != home:
                    count += 1
    return count


def build_report(
    instance: Instance,
    families: FamilySolution,
    cells: CellSolution,
    D: DissimilarityMatrix | None = None,
) -> GroupingReport:
    _check_consistent(families, cells)
    if D is None:
        D = dissimilarity_matrix(instance)

    rows: list[int] = []
    cols: list[int] = []
    row_blocks, col_blocks = [], []
    layout = cells.cells()
    for machines, fams in layout:
        block = [i for r in fams for i in families.families[r - 1]]
        rows += block
        cols += machines
        row_blocks.append(len(block))
        col_blocks.append(len(machines))

    matrix = instance.incidence[np.ix_([i - 1 for i in rows], [m - 1 for m in cols])].copy()
    matrix.setflags(write=False)
    labels = []
    for i in rows:
        k = instance.part_of(i)
        labels.append((k, instance.routes_of(k).index(i) + 1))

    return GroupingReport(
        row_order=tuple(rows),
        column_order=tuple(cols),
        matrix=matrix,
        row_blocks=tuple(row_blocks),
        column_blocks=tuple(col_blocks),
        exceptional_elements=count_exceptional_elements(instance, families, cells),
        utilization=cells.utilization,
        objective=families.objective,
        family_dissimilarities=tuple(
            family_cyclic_dissimilarity(D, f) for f in families.families
        ),
        families=families.families,
        selected_route=dict(families.selected_route),
        cells=tuple(layout),
        row_labels=tuple(labels),
    )


def _render_grid(report: GroupingReport) -> str:
    head = ["Part", "Route", "No."]
    machine_cols = [str(m) for m in report.column_order]
    body = [
        [str(k), str(p), str(i)] + [str(int(v)) for v in row]
        for (k, p), i, row in zip(report.row_labels, report.row_order, report.matrix)
    ]
    widths = [
        max(len(head[c]), *(len(r[c]) for r in body)) if body else len(head[c])
        for c in range(3)
    ]
    mwidth = max([len(s) for s in machine_cols] + [1])

    col_cuts = set(np.cumsum(report.column_blocks)[:-1].tolist())

    def line(cells3, machine_cells):
        left = "  ".join(s.rjust(w) for s, w in zip(cells3, widths))
        parts = []
        for c, s in enumerate(machine_cells):
            if c in col_cuts:
                parts.append("|")
            parts.append(s.rjust(mwidth))
        return f"{left} | {' '.join(parts)}".rstrip()

    out = [line(head, machine_cols)]
    rule = "-" * len(out[0])
    out.append(rule)
    start = 0
    for n in report.row_blocks:
        for row in body[start : start + n]:
            out.append(line(row[:3], row[3:]))
        start += n
        if n:
            out.append(rule)
    return "\n".join(out)


def render_table(report: GroupingReport, format: str = "table") -> str:
    """Render as a text grid (cells separated by rules) or as stable JSON."""
    if format == "json":
        return json.dumps(report.to_dict(), indent=2)
    if format != "table":
        raise ValueError(f"unknown format {format!r}")
    lines = [_render_grid(report), ""]
    for n, ((machines, fams), _) in enumerate(zip(report.cells, report.row_blocks), start=1):
        lines.append(
            f"cell {n}: machines {list(machines)}  families {list(fams)}"
        )
    for r, (f, dis) in enumerate(zip(report.families, report.family_dissimilarities), start=1):
        lines.append(f"family {r}: routes {list(f)}  cyclic dissimilarity {dis}")
    lines.append(f"flow objective: {report.objective}")
    lines.append(f"utilization: {report.utilization}")
    lines.append(f"exceptional elements: {report.exceptional_elements}")
    return "\n".join(lines)
