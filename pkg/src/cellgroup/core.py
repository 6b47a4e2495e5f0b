"""Problem data model: parts, alternative process routes and the route-machine incidence matrix.

All identifiers are 1-based integers. Routes carry a global serial number
``1..N`` in part order, so part ``k`` owns a contiguous block of routes.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateRouteError,
    EmptyRouteError,
    InstanceError,
    TooFewPartsError,
)

PartId = int
MachineId = int
RouteId = int


@dataclass(frozen=True, eq=False)
class Instance:
    """A validated generalized grouping instance.

    Attributes:
        machine_count: Number of machines ``M``.
        parts: ``parts[k - 1]`` is the ordered tuple of route ids of part ``k``.
        incidence: Read-only ``(N, M)`` uint8 array; ``incidence[i - 1, m - 1]``
            is 1 when route ``i`` requires machine ``m``.

    Build instances through :func:`validate_instance` or
    :meth:`from_machine_sets`; the constructor does not check invariants.
    """

    machine_count: int
    parts: tuple[tuple[RouteId, ...], ...]
    incidence: np.ndarray = field(repr=False)

    @classmethod
    def from_machine_sets(
        cls, machine_count: int, parts: Sequence[Sequence[Iterable[MachineId]]]
    ) -> Instance:
        """Build an instance from per-part lists of route machine sets.

        Routes are numbered globally in the order given.
        """
        route_ids: list[list[int]] = []
        rows: list[list[int]] = []
        for routes in parts:
            ids = []
            for machines in routes:
                row = [0] * machine_count
                for m in machines:
                    if not 1 <= m <= machine_count:
                        raise DimensionMismatchError(
                            f"machine {m} outside 1..{machine_count}"
                        )
                    row[m - 1] = 1
                rows.append(row)
                ids.append(len(rows))
            route_ids.append(ids)
        return validate_instance(
            {"machine_count": machine_count, "parts": route_ids, "incidence": rows}
        )

    @property
    def part_count(self) -> int:
        return len(self.parts)

    @property
    def route_count(self) -> int:
        return int(self.incidence.shape[0])

    @cached_property
    def _part_of(self) -> tuple[PartId, ...]:
        owner = [0] * self.route_count
        for k, routes in enumerate(self.parts, start=1):
            for i in routes:
                owner[i - 1] = k
        return tuple(owner)

    def part_of(self, i: RouteId) -> PartId:
        self._check_route(i)
        return self._part_of[i - 1]

    def routes_of(self, k: PartId) -> tuple[RouteId, ...]:
        if not 1 <= k <= self.part_count:
            raise IndexError(f"part {k} outside 1..{self.part_count}")
        return self.parts[k - 1]

    def _check_route(self, i: RouteId) -> None:
        if not 1 <= i <= self.route_count:
            raise IndexError(f"route {i} outside 1..{self.route_count}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.machine_count == other.machine_count
            and self.parts == other.parts
            and np.array_equal(self.incidence, other.incidence)
        )

    def __hash__(self) -> int:
        return hash((self.machine_count, self.parts, self.incidence.tobytes()))


def machines_of(instance: Instance, i: RouteId) -> frozenset[MachineId]:
    """Machines required by route ``i``."""
    instance._check_route(i)
    return frozenset(int(m) + 1 for m in np.flatnonzero(instance.incidence[i - 1]))


def validate_instance(raw: Mapping) -> Instance:
    """Check raw instance data and freeze it into an :class:`Instance`.

    ``raw`` must provide ``machine_count`` (int), ``parts`` (a sequence of
    route-id sequences, one per part, in part order) and ``incidence``
    (``N`` rows of ``M`` zero/one entries, row ``i - 1`` for route ``i``).
    """
    try:
        machine_count = int(raw["machine_count"])
        parts_raw = raw["parts"]
        rows = raw["incidence"]
    except KeyError as exc:
        raise InstanceError(f"missing field {exc.args[0]!r}") from None

    if machine_count < 1:
        raise DimensionMismatchError(f"machine count must be >= 1, got {machine_count}")

    incidence = np.asarray(rows)
    if incidence.ndim != 2 or incidence.shape[1] != machine_count:
        raise DimensionMismatchError(
            f"incidence must be N x {machine_count}, got shape {incidence.shape}"
        )
    if not np.isin(incidence, (0, 1)).all():
        raise InstanceError("incidence entries must be 0 or 1")
    n_routes = incidence.shape[0]

    parts: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for k, routes in enumerate(parts_raw, start=1):
        routes = tuple(int(i) for i in routes)
        if not routes:
            raise InstanceError(f"part {k} has no process routes")
        for i in routes:
            if i in seen:
                raise DuplicateRouteError(f"route {i} assigned more than once")
            if not 1 <= i <= n_routes:
                raise DimensionMismatchError(f"route {i} outside 1..{n_routes}")
            seen.add(i)
        parts.append(routes)
    if len(seen) != n_routes:
        missing = sorted(set(range(1, n_routes + 1)) - seen)
        raise DimensionMismatchError(f"routes {missing} belong to no part")
    if len(parts) < 2:
        raise TooFewPartsError(
            f"at least two parts are needed to form families, got {len(parts)}"
        )

    empty = np.flatnonzero(incidence.sum(axis=1) == 0)
    if empty.size:
        raise EmptyRouteError(f"route {int(empty[0]) + 1} uses no machine")

    incidence = incidence.astype(np.uint8)
    incidence.setflags(write=False)
    return Instance(machine_count, tuple(parts), incidence)
