"""Machine cell formation from route families.

Two methods share the same usage factors ``u[m, r]`` (routes of family ``r``
that need machine ``m``) and the same result type:

* :func:`solve_qap` maximizes utilization exactly over all family-to-cell
  and machine-to-cell assignments with a per-cell machine cap.
* :func:`run_heuristic` merges nested families, gives each machine to its
  heaviest user and then merges cells that exchange work.

Cells in a :class:`CellSolution` are numbered canonically: cells holding
machines come first, ordered by their smallest machine, then machine-less
cells by their smallest family. Empty cells are dropped.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Instance
from .errors import InfeasibleConfigError, SolverTimeout
from .family.solver import FamilySolution

logger = logging.getLogger(__name__)

DEFAULT_ASSIGNMENT_LIMIT = 500_000


@dataclass(frozen=True)
class CellConfig:
    max_cells: int
    max_per_cell: int

    def __post_init__(self):
        if self.max_cells < 1 or self.max_per_cell < 1:
            raise InfeasibleConfigError(
                f"cell limits must be positive, got C={self.max_cells}, max_c={self.max_per_cell}"
            )

    @classmethod
    def default(cls, machine_count: int, family_count: int) -> CellConfig:
        """One cell per family, cap ``ceil(M / C)``."""
        cells = max(1, family_count)
        return cls(cells, math.ceil(machine_count / cells))

    def check(self, machine_count: int) -> None:
        if self.max_cells * self.max_per_cell < machine_count:
            raise InfeasibleConfigError(
                f"{self.max_cells} cells of at most {self.max_per_cell} machines "
                f"cannot hold {machine_count} machines"
            )


@dataclass(frozen=True)
class CellSolution:
    """Machine and family assignment to cells (all ids 1-based).

    ``warnings`` carries heuristic notes such as orphan machines and is
    ignored by equality.
    """

    machine_cell: dict[int, int]
    family_cell: dict[int, int]
    utilization: int
    cell_count_used: int
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def cells(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """``(machines, families)`` per cell, in cell order."""
        out = []
        for c in range(1, self.cell_count_used + 1):
            machines = tuple(m for m, cc in sorted(self.machine_cell.items()) if cc == c)
            families = tuple(r for r, cc in sorted(self.family_cell.items()) if cc == c)
            out.append((machines, families))
        return out


def usage_factors(instance: Instance, families: FamilySolution) -> np.ndarray:
    """``(M, R)`` integer matrix of usage factors."""
    u = np.zeros((instance.machine_count, families.family_count), dtype=np.int64)
    for r, family in enumerate(families.families):
        rows = instance.incidence[[i - 1 for i in family]]
        u[:, r] = rows.sum(axis=0)
    return u


def utilization(u: np.ndarray, machine_cell: dict[int, int], family_cell: dict[int, int]) -> int:
    total = 0
    for r, c in family_cell.items():
        for m, cm in machine_cell.items():
            if cm == c:
                total += int(u[m - 1, r - 1])
    return total


def _canonical_solution(
    u: np.ndarray,
    machine_cell: dict[int, int],
    family_cell: dict[int, int],
    warnings: Sequence[str] = (),
) -> CellSolution:
    labels = set(machine_cell.values()) | set(family_cell.values())
    M = u.shape[0]

    def key(c):
        ms = [m for m, cc in machine_cell.items() if cc == c]
        if ms:
            return (0, min(ms))
        return (1, min(r for r, cc in family_cell.items() if cc == c) + M)

    relabel = {c: n for n, c in enumerate(sorted(labels, key=key), start=1)}
    mc = {m: relabel[c] for m, c in sorted(machine_cell.items())}
    fc = {r: relabel[c] for r, c in sorted(family_cell.items())}
    return CellSolution(mc, fc, utilization(u, mc, fc), len(relabel), tuple(warnings))


def _family_partitions(n_families: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings: each labelling of families with cells up to relabelling."""
    labels = [0] * n_families

    def rec(pos: int, used: int):
        if pos == n_families:
            yield tuple(labels)
            return
        for c in range(min(used + 1, max_blocks)):
            labels[pos] = c
            yield from rec(pos + 1, max(used, c + 1))

    if n_families == 0:
        yield ()
        return
    yield from rec(0, 0)


def solve_qap(
    u: np.ndarray,
    config: CellConfig,
    *,
    assignment_limit: int = DEFAULT_ASSIGNMENT_LIMIT,
) -> CellSolution:
    """Exact maximum-utilization assignment of families and machines to cells.

    Family labellings are enumerated up to cell symmetry; for each one the
    machines are placed by a transportation problem (cells expanded into
    ``max_per_cell`` unit slots) solved as a linear assignment. Among equal
    utilizations the first labelling in enumeration order wins, and inside a
    labelling machines prefer lower cell labels.
    """
    u = np.asarray(u, dtype=np.int64)
    M, R = u.shape
    config.check(M)
    C = config.max_cells
    slots = min(config.max_per_cell, M)
    slot_cell = np.repeat(np.arange(C), slots)
    weight = M * C + 1

    best_value, best = -1, None
    for n, labels in enumerate(_family_partitions(R, C)):
        if n >= assignment_limit:
            raise SolverTimeout(
                f"family labelling limit {assignment_limit} reached",
                incumbent=best,
                bound=int(u.sum()),
            )
        profit = np.zeros((M, C), dtype=np.int64)
        for r, c in enumerate(labels):
            profit[:, c] += u[:, r]
        cost = -profit[:, slot_cell] * weight + slot_cell[None, :]
        rows, cols = linear_sum_assignment(cost)
        value = int(profit[rows, slot_cell[cols]].sum())
        if value > best_value:
            machine_cell = {int(m) + 1: int(slot_cell[s]) for m, s in zip(rows, cols)}
            family_cell = {r + 1: c for r, c in enumerate(labels)}
            best_value = value
            best = _canonical_solution(u, machine_cell, family_cell)
    return best


def same_grouping(a: CellSolution, b: CellSolution, u: np.ndarray) -> bool:
    """True when both solutions group families and used machines identically.

    Machines no family uses add nothing to utilization under either method,
    so where they are parked is ignored.
    """
    used = {m + 1 for m in np.flatnonzero(np.asarray(u).sum(axis=1))}

    def blocks(sol: CellSolution):
        out = {}
        for m, c in sol.machine_cell.items():
            if m in used:
                out.setdefault(c, [set(), set()])[0].add(m)
        for r, c in sol.family_cell.items():
            out.setdefault(c, [set(), set()])[1].add(r)
        return {(frozenset(ms), frozenset(fs)) for ms, fs in out.values()}

    return a.utilization == b.utilization and blocks(a) == blocks(b)


# -- heuristic ---------------------------------------------------------------


def heuristic_step1_merge_families(u: np.ndarray) -> list[tuple[int, ...]]:
    """Merge families whose machine sets are nested, until none are.

    Returns groups of 1-based family indices, ordered by first member. Pairs
    are scanned in ascending index order and the scan restarts after each
    merge; the merged group keeps the lower position.
    """
    u = np.asarray(u)
    groups = [[r + 1] for r in range(u.shape[1])]
    sets = [frozenset(np.flatnonzero(u[:, r]) + 1) for r in range(u.shape[1])]
    merged = True
    while merged:
        merged = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if sets[a] <= sets[b] or sets[b] <= sets[a]:
                    groups[a] += groups.pop(b)
                    sets[a] = sets[a] | sets.pop(b)
                    merged = True
                    break
            if merged:
                break
    return [tuple(sorted(g)) for g in groups]


class MachineAssignment(NamedTuple):
    family_of: dict[int, int | None]
    orphans: tuple[int, ...]


def heuristic_step2_assign_machines(
    u: np.ndarray, max_per_cell: int | None = None
) -> MachineAssignment:
    """Give each machine to the family (column of ``u``) that uses it most.

    Ties go to the smallest family index. A machine no family uses is an
    orphan and goes to family 1. With ``max_per_cell`` set, machines are
    placed heaviest-first and skip families already at the cap; a machine
    that fits nowhere maps to ``None``.
    """
    u = np.asarray(u)
    M, R = u.shape
    if R == 0:
        raise ValueError("at least one family is required")
    cap = M if max_per_cell is None else max_per_cell
    load = [0] * R
    order = sorted(range(M), key=lambda m: (-int(u[m].max()), m))
    family_of: dict[int, int | None] = {}
    orphans = []
    for m in order:
        if u[m].max() == 0:
            orphans.append(m + 1)
            candidates = [0]
        else:
            candidates = sorted(range(R), key=lambda r: (-int(u[m, r]), r))
        choice = next((r for r in candidates if load[r] < cap), None)
        if choice is None and u[m].max() == 0:
            choice = next((r for r in range(R) if load[r] < cap), None)
        if choice is not None:
            load[choice] += 1
            family_of[m + 1] = choice + 1
        else:
            family_of[m + 1] = None
    if orphans:
        logger.info("machines %s are used by no family", orphans)
    return MachineAssignment(dict(sorted(family_of.items())), tuple(sorted(orphans)))


@dataclass
class _Cell:
    machines: set[int]
    families: set[int]


def _movement(u: np.ndarray, a: _Cell, b: _Cell) -> int:
    """Route-machine requirements crossing between two cells."""
    total = 0
    for r in a.families:
        total += sum(int(u[m - 1, r - 1]) for m in b.machines)
    for r in b.families:
        total += sum(int(u[m - 1, r - 1]) for m in a.machines)
    return total


def _gain(u: np.ndarray, families: set[int], cell: _Cell) -> int:
    return sum(int(u[m - 1, r - 1]) for r in families for m in cell.machines)


def _merge_best_pair(u, cells, cap, require_movement: bool) -> bool:
    best = None
    for a in range(len(cells)):
        for b in range(a + 1, len(cells)):
            if len(cells[a].machines) + len(cells[b].machines) > cap:
                continue
            move = _movement(u, cells[a], cells[b])
            if require_movement and move == 0:
                continue
            if best is None or move > best[0]:
                best = (move, a, b)
    if best is None:
        return False
    _, a, b = best
    cells[a].machines |= cells[b].machines
    cells[a].families |= cells[b].families
    del cells[b]
    return True


def _fold_families(u, cells, donor: _Cell) -> None:
    """Move a cell's families into the machine-holding cell that gains most."""
    targets = [c for c in cells if c is not donor and c.machines]
    if not targets:
        return
    target = max(targets, key=lambda c: (_gain(u, donor.families, c), -cells.index(c)))
    target.families |= donor.families
    donor.families = set()


def heuristic_step3_merge_cells(
    u: np.ndarray,
    groups: Sequence[Sequence[int]],
    assignment: MachineAssignment,
    config: CellConfig,
) -> CellSolution:
    """Merge cells that exchange work, largest exchange first, within the cap.

    After the merges the result is made feasible for ``config``: cells
    without machines hand their families to the cell that uses them most,
    surplus cells are merged (or, if no pair fits, the smallest is dissolved)
    until at most ``max_cells`` remain, and machines left unplaced by the
    cap go to the open cell that uses them most.
    """
    u = np.asarray(u, dtype=np.int64)
    M = u.shape[0]
    config.check(M)
    cap = config.max_per_cell
    cells = [_Cell(set(), set(g)) for g in groups]
    free: set[int] = set()
    for m, g in assignment.family_of.items():
        if g is None:
            free.add(m)
        else:
            cells[g - 1].machines.add(m)

    while _merge_best_pair(u, cells, cap, require_movement=True):
        pass

    notes = [f"machine {m} is used by no family" for m in assignment.orphans]
    for cell in list(cells):
        if not cell.machines and cell.families:
            _fold_families(u, cells, cell)
    cells = [c for c in cells if c.machines or c.families]

    while len(cells) > config.max_cells:
        if _merge_best_pair(u, cells, cap, require_movement=False):
            continue
        victim = min(reversed(cells), key=lambda c: len(c.machines))
        notes.append(f"dissolved cell with machines {sorted(victim.machines)} to meet the cell limit")
        free |= victim.machines
        victim.machines = set()
        _fold_families(u, cells, victim)
        cells.remove(victim)

    for m in sorted(free):
        open_cells = [c for c in cells if len(c.machines) < cap]
        if open_cells:
            target = max(
                open_cells,
                key=lambda c: (sum(int(u[m - 1, r - 1]) for r in c.families), -cells.index(c)),
            )
            target.machines.add(m)
        else:
            cells.append(_Cell({m}, set()))

    machine_cell = {m: n for n, c in enumerate(cells) for m in c.machines}
    family_cell = {r: n for n, c in enumerate(cells) for r in c.families}
    return _canonical_solution(u, machine_cell, family_cell, notes)


def heuristic_from_usage(u: np.ndarray, config: CellConfig) -> CellSolution:
    """Run the three heuristic steps on a usage matrix; families are its columns."""
    u = np.asarray(u, dtype=np.int64)
    config.check(u.shape[0])
    groups = heuristic_step1_merge_families(u)
    grouped = np.stack([u[:, [r - 1 for r in g]].sum(axis=1) for g in groups], axis=1)
    assignment = heuristic_step2_assign_machines(grouped, config.max_per_cell)
    return heuristic_step3_merge_cells(u, groups, assignment, config)


def run_heuristic(
    instance: Instance, families: FamilySolution, config: CellConfig
) -> CellSolution:
    return heuristic_from_usage(usage_factors(instance, families), config)
