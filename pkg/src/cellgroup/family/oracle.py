"""Brute-force reference for family formation, used to cross-check the solver.

Every choice of one route per part is enumerated; for each choice the
cheapest cycle cover without same-part successors is found by dynamic
programming over subsets of successor slots. Nothing here shares code with
the branch-and-bound solver.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..core import Instance
from ..dissimilarity import DissimilarityMatrix, dissimilarity_matrix
from ..errors import InstanceTooLargeError
from .solver import FamilySolution

MAX_SELECTIONS = 100_000
MAX_PARTS = 9
_CHUNK_CELLS = 4_000_000


def _cover_costs(costs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cheapest successor permutation per selection.

    ``costs`` has shape ``(S, K, K)`` with ``inf`` on forbidden entries.
    Returns the ``(S,)`` optimum and the full ``(S, 2**K)`` DP table, where
    ``table[s, mask]`` is the cheapest way to give parts ``0..popcount-1``
    distinct successors drawn from ``mask``.
    """
    S, K, _ = costs.shape
    table = np.full((S, 1 << K), np.inf)
    table[:, 0] = 0.0
    for mask in range(1, 1 << K):
        row = bin(mask).count("1") - 1
        best = table[:, mask]
        for col in range(K):
            bit = 1 << col
            if mask & bit:
                cand = table[:, mask ^ bit] + costs[:, row, col]
                np.minimum(best, cand, out=best)
    return table[:, -1], table


def _trace(costs: np.ndarray, table: np.ndarray) -> list[int]:
    K = costs.shape[0]
    mask = (1 << K) - 1
    succ = [0] * K
    for row in range(K - 1, -1, -1):
        for col in range(K):
            bit = 1 << col
            if mask & bit and table[mask ^ bit] + costs[row, col] == table[mask]:
                succ[row] = col
                mask ^= bit
                break
    return succ


def brute_force_families(
    instance: Instance,
    D: DissimilarityMatrix | None = None,
    *,
    max_selections: int = MAX_SELECTIONS,
    max_parts: int = MAX_PARTS,
) -> FamilySolution:
    K = instance.part_count
    n_sel = math.prod(len(r) for r in instance.parts)
    if K > max_parts or n_sel > max_selections:
        raise InstanceTooLargeError(
            f"oracle limited to {max_parts} parts and {max_selections} route selections; "
            f"instance has {K} parts and {n_sel} selections"
        )
    if D is None:
        D = dissimilarity_matrix(instance)
    d = np.where(D.defined, D.values.astype(float), np.inf)
    selections = np.array(list(itertools.product(*instance.parts)), dtype=np.int64)

    chunk = max(1, _CHUNK_CELLS >> K)
    best_value, best_row = np.inf, -1
    for start in range(0, len(selections), chunk):
        sel = selections[start : start + chunk] - 1
        costs = d[sel[:, :, None], sel[:, None, :]]
        values, _ = _cover_costs(costs)
        pos = int(np.argmin(values))
        if values[pos] < best_value:
            best_value, best_row = float(values[pos]), start + pos

    chosen = selections[best_row]
    costs = d[np.ix_(chosen - 1, chosen - 1)]
    _, table = _cover_costs(costs[None])
    succ = _trace(costs, table[0])
    successor = {int(chosen[k]): int(chosen[succ[k]]) for k in range(K)}

    cycles, seen = [], set()
    for start in sorted(successor):
        if start in seen:
            continue
        cycle, nxt = [start], successor[start]
        seen.add(start)
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = successor[nxt]
        cycles.append(tuple(cycle))
    selected = {k: int(chosen[k - 1]) for k in range(1, K + 1)}
    return FamilySolution(selected, tuple(cycles), int(best_value))
