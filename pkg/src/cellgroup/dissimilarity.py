"""Route dissimilarity (machines not shared by two routes) and family cycle cost."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .core import Instance, RouteId
from .errors import FamilyTooSmallError, SamePartPairError

EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Symmetric dissimilarities ``d_ij`` between routes of distinct parts.

    Same-part pairs (including ``i == j``) are absent: indexing them raises
    :class:`SamePartPairError` instead of returning a placeholder number.
    """

    values: np.ndarray = field(repr=False)
    defined: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, pair: tuple[RouteId, RouteId]) -> int:
        i, j = pair
        if not (1 <= i <= self.size and 1 <= j <= self.size):
            raise IndexError(f"route pair {pair} outside 1..{self.size}")
        if not self.defined[i - 1, j - 1]:
            raise SamePartPairError(f"routes {i} and {j} belong to the same part")
        return int(self.values[i - 1, j - 1])

    def is_defined(self, i: RouteId, j: RouteId) -> bool:
        return bool(self.defined[i - 1, j - 1])

    def pairs(self):
        """Yield ``(i, j, d_ij)`` for every defined ordered pair, row-major."""
        for a, b in zip(*np.nonzero(self.defined)):
            yield int(a) + 1, int(b) + 1, int(self.values[a, b])


def _same_part_mask(instance: Instance) -> np.ndarray:
    owner = np.array([instance.part_of(i) for i in range(1, instance.route_count + 1)])
    return owner[:, None] == owner[None, :]


def route_dissimilarity(instance: Instance, i: RouteId, j: RouteId) -> int:
    """Hamming distance between the incidence rows of routes ``i`` and ``j``.

    Equivalently ``|S_i| + |S_j| - 2 |S_i & S_j|`` for machine sets ``S``.
    """
    if instance.part_of(i) == instance.part_of(j):
        raise SamePartPairError(f"routes {i} and {j} belong to the same part")
    a = instance.incidence[i - 1]
    b = instance.incidence[j - 1]
    return int(np.count_nonzero(a != b))


def dissimilarity_matrix(instance: Instance) -> DissimilarityMatrix:
    rows = instance.incidence.astype(np.int64)
    common = rows @ rows.T
    sizes = rows.sum(axis=1)
    values = sizes[:, None] + sizes[None, :] - 2 * common
    defined = ~_same_part_mask(instance)
    values = np.where(defined, values, 0)
    values.setflags(write=False)
    defined.setflags(write=False)
    return DissimilarityMatrix(values, defined)


def family_cyclic_dissimilarity(D: DissimilarityMatrix, family: Iterable[RouteId]) -> int:
    """Smallest total dissimilarity around any cyclic ordering of ``family``.

    The smallest route id anchors the cycle and the remaining routes are
    permuted exhaustively, giving ``(n - 1)!`` directed orders. Families in
    this setting are small; the exact value is wanted, not a tour heuristic.
    Beyond ``EXHAUSTIVE_LIMIT`` routes an exact subset DP takes over.
    """
    members = sorted(set(family))
    if len(members) < 2:
        raise FamilyTooSmallError(f"a family needs at least two routes, got {members}")
    for x in range(len(members)):
        for y in range(x + 1, len(members)):
            if not D.is_defined(members[x], members[y]):
                raise SamePartPairError(
                    f"routes {members[x]} and {members[y]} belong to the same part"
                )
    if len(members) > EXHAUSTIVE_LIMIT:
        return _held_karp(D, members)
    anchor, rest = members[0], members[1:]
    best = None
    for order in permutations(rest):
        tour = (anchor, *order)
        cost = sum(D[tour[t], tour[(t + 1) % len(tour)]] for t in range(len(tour)))
        if best is None or cost < best:
            best = cost
    return best


def _held_karp(D: DissimilarityMatrix, members: list[RouteId]) -> int:
    """Exact shortest closed tour by subset dynamic programming, anchored at members[0]."""
    n = len(members)
    cost = [[D[a, b] if a != b else 0 for b in members] for a in members]
    full = 1 << (n - 1)
    # best[mask][j]: cheapest path anchor -> ... -> member j+1 visiting exactly mask
    best = [[None] * (n - 1) for _ in range(full)]
    for j in range(n - 1):
        best[1 << j][j] = cost[0][j + 1]
    for mask in range(1, full):
        for j in range(n - 1):
            here = best[mask][j]
            if here is None:
                continue
            for k in range(n - 1):
                if mask & (1 << k):
                    continue
                nxt = mask | (1 << k)
                cand = here + cost[j + 1][k + 1]
                if best[nxt][k] is None or cand < best[nxt][k]:
                    best[nxt][k] = cand
    return min(best[full - 1][j] + cost[j + 1][0] for j in range(n - 1))
