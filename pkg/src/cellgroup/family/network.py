"""Unit-capacity flow network for route family formation.

Per part ``k`` there is a supply node ``k_s`` and a demand node ``k_d``, both
carrying ``TPR(k) - 1`` units. Each route ``i`` is split into ``i_a -> i_b``
with a forced unit of flow. Supply arcs feed ``i_a`` from its own part,
demand arcs drain ``i_b`` into its own part, and relational arcs
``i_b -> j_a`` join routes of different parts at cost ``d_ij``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

from ..core import Instance, RouteId
from ..dissimilarity import DissimilarityMatrix


class NodeKind(enum.IntEnum):
    SUPPLY = 0
    ROUTE_IN = 1
    ROUTE_OUT = 2
    DEMAND = 3


class ArcKind(enum.IntEnum):
    SUPPLY = 0
    TRANSSHIPMENT = 1
    DEMAND = 2
    RELATIONAL = 3


_SUFFIX = {
    NodeKind.SUPPLY: "s",
    NodeKind.ROUTE_IN: "a",
    NodeKind.ROUTE_OUT: "b",
    NodeKind.DEMAND: "d",
}


@dataclass(frozen=True, order=True)
class FlowNode:
    kind: NodeKind
    index: int
    balance: int = field(default=0, compare=False)

    @property
    def label(self) -> str:
        return f"{self.index}_{_SUFFIX[self.kind]}"


@dataclass(frozen=True)
class FlowArc:
    tail: FlowNode
    head: FlowNode
    upper: int
    lower: int
    cost: int
    kind: ArcKind

    @property
    def label(self) -> str:
        return f"({self.tail.label}, {self.head.label})"


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    nodes: tuple[FlowNode, ...]
    arcs: tuple[FlowArc, ...]

    @cached_property
    def node_id(self) -> dict[FlowNode, int]:
        """1-based node numbering in node order, as used by the DIMACS export."""
        return {node: n for n, node in enumerate(self.nodes, start=1)}

    @cached_property
    def arc_index(self) -> dict[FlowArc, int]:
        return {arc: n for n, arc in enumerate(self.arcs)}

    @cached_property
    def _by_route(self) -> dict[tuple[ArcKind, int], int]:
        out = {}
        for n, arc in enumerate(self.arcs):
            if arc.kind is ArcKind.SUPPLY:
                out[ArcKind.SUPPLY, arc.head.index] = n
            elif arc.kind is ArcKind.TRANSSHIPMENT:
                out[ArcKind.TRANSSHIPMENT, arc.tail.index] = n
            elif arc.kind is ArcKind.DEMAND:
                out[ArcKind.DEMAND, arc.tail.index] = n
        return out

    @cached_property
    def _relational(self) -> dict[tuple[int, int], int]:
        return {
            (arc.tail.index, arc.head.index): n
            for n, arc in enumerate(self.arcs)
            if arc.kind is ArcKind.RELATIONAL
        }

    def supply_arc(self, i: RouteId) -> int:
        """Position in :attr:`arcs` of the supply arc feeding route ``i``."""
        return self._by_route[ArcKind.SUPPLY, i]

    def transshipment_arc(self, i: RouteId) -> int:
        return self._by_route[ArcKind.TRANSSHIPMENT, i]

    def demand_arc(self, i: RouteId) -> int:
        return self._by_route[ArcKind.DEMAND, i]

    def relational_arc(self, i: RouteId, j: RouteId) -> int:
        return self._relational[i, j]

    @property
    def route_count(self) -> int:
        return sum(1 for node in self.nodes if node.kind is NodeKind.ROUTE_IN)


def build_network(instance: Instance, D: DissimilarityMatrix) -> FlowNetwork:
    supply, route_in, route_out, demand = [], {}, {}, []
    for k, routes in enumerate(instance.parts, start=1):
        supply.append(FlowNode(NodeKind.SUPPLY, k, len(routes) - 1))
        demand.append(FlowNode(NodeKind.DEMAND, k, -(len(routes) - 1)))
    for i in range(1, instance.route_count + 1):
        route_in[i] = FlowNode(NodeKind.ROUTE_IN, i)
        route_out[i] = FlowNode(NodeKind.ROUTE_OUT, i)
    nodes = (
        *supply,
        *(route_in[i] for i in sorted(route_in)),
        *(route_out[i] for i in sorted(route_out)),
        *demand,
    )

    by_kind: dict[ArcKind, list[FlowArc]] = {kind: [] for kind in ArcKind}
    for k, routes in enumerate(instance.parts, start=1):
        for i in routes:
            by_kind[ArcKind.SUPPLY].append(
                FlowArc(supply[k - 1], route_in[i], 1, 0, 0, ArcKind.SUPPLY)
            )
            by_kind[ArcKind.DEMAND].append(
                FlowArc(route_out[i], demand[k - 1], 1, 0, 0, ArcKind.DEMAND)
            )
    for i in route_in:
        by_kind[ArcKind.TRANSSHIPMENT].append(
            FlowArc(route_in[i], route_out[i], 1, 1, 0, ArcKind.TRANSSHIPMENT)
        )
    for i, j, d in D.pairs():
        by_kind[ArcKind.RELATIONAL].append(
            FlowArc(route_out[i], route_in[j], 1, 0, d, ArcKind.RELATIONAL)
        )

    arcs = []
    for kind in ArcKind:
        arcs.extend(sorted(by_kind[kind], key=lambda a: (a.tail, a.head)))
    return FlowNetwork(nodes, tuple(arcs))


def to_dimacs(network: FlowNetwork) -> str:
    """Serialize as a DIMACS ``min`` problem.

    The one-route-per-path side condition has no DIMACS encoding, so each
    route contributes a ``c side-constraint`` comment equating its supply and
    demand arc flows, written with DIMACS node numbers.
    """
    ids = network.node_id
    lines = [
        "c cellgroup route family network",
        "c node order: supply 1..K, route-in 1..N, route-out 1..N, demand 1..K",
        f"p min {len(network.nodes)} {len(network.arcs)}",
    ]
    for node in network.nodes:
        if node.balance:
            lines.append(f"n {ids[node]} {node.balance}")
    for arc in network.arcs:
        lines.append(
            f"a {ids[arc.tail]} {ids[arc.head]} {arc.lower} {arc.upper} {arc.cost}"
        )
    for i in range(1, network.route_count + 1):
        sup = network.arcs[network.supply_arc(i)]
        dem = network.arcs[network.demand_arc(i)]
        lines.append(
            f"c side-constraint f({ids[sup.tail]},{ids[sup.head]})"
            f" = f({ids[dem.tail]},{ids[dem.head]})"
        )
    return "\n".join(lines) + "\n"
