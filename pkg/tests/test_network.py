import pytest

from cellgroup import Instance, build_network, dissimilarity_matrix, to_dimacs
from cellgroup.family import ArcKind, NodeKind


def network_of(instance):
    return build_network(instance, dissimilarity_matrix(instance))


def expected_arc_count(instance):
    N = instance.route_count
    same = sum(len(r) * (len(r) - 1) for r in instance.parts)
    return 3 * N + N * (N - 1) - same


def test_table2_counts(example1):
    net = network_of(example1)
    assert len(net.nodes) == 2 * 5 + 2 * 11 == 32
    by_kind = {kind: sum(a.kind is kind for a in net.arcs) for kind in ArcKind}
    assert by_kind == {
        ArcKind.SUPPLY: 11,
        ArcKind.TRANSSHIPMENT: 11,
        ArcKind.DEMAND: 11,
        ArcKind.RELATIONAL: 96,
    }
    assert len(net.arcs) == 129 == expected_arc_count(example1)


def test_smallest_network():
    inst = Instance.from_machine_sets(2, [[{1}], [{1, 2}]])
    net = network_of(inst)
    assert len(net.nodes) == 8
    assert len(net.arcs) == 8
    assert all(n.balance == 0 for n in net.nodes)
    costs = sorted(a.cost for a in net.arcs if a.kind is ArcKind.RELATIONAL)
    assert costs == [1, 1]


def test_arc_triplets_and_balances(example1):
    net = network_of(example1)
    D = dissimilarity_matrix(example1)
    for node in net.nodes:
        if node.kind is NodeKind.SUPPLY:
            assert node.balance == len(example1.routes_of(node.index)) - 1
        elif node.kind is NodeKind.DEMAND:
            assert node.balance == -(len(example1.routes_of(node.index)) - 1)
        else:
            assert node.balance == 0
    assert sum(n.balance for n in net.nodes) == 0
    for arc in net.arcs:
        triplet = (arc.upper, arc.lower, arc.cost)
        if arc.kind is ArcKind.SUPPLY:
            assert triplet == (1, 0, 0)
            assert arc.head.index in example1.routes_of(arc.tail.index)
        elif arc.kind is ArcKind.TRANSSHIPMENT:
            assert triplet == (1, 1, 0)
            assert arc.tail.index == arc.head.index
        elif arc.kind is ArcKind.DEMAND:
            assert triplet == (1, 0, 0)
            assert arc.tail.index in example1.routes_of(arc.head.index)
        else:
            i, j = arc.tail.index, arc.head.index
            assert example1.part_of(i) != example1.part_of(j)
            assert triplet == (1, 0, D[i, j])
            assert (arc.tail.kind, arc.head.kind) == (NodeKind.ROUTE_OUT, NodeKind.ROUTE_IN)


def test_deterministic_ordering(example1):
    net = network_of(example1)
    assert list(net.nodes) == sorted(net.nodes)
    keys = [(a.kind, a.tail, a.head) for a in net.arcs]
    assert keys == sorted(keys)
    assert to_dimacs(net) == to_dimacs(network_of(example1))


def parse_dimacs(text):
    header, nodes, arcs, sides = None, {}, [], []
    for line in text.splitlines():
        tag, *rest = line.split()
        if tag == "p":
            header = (rest[0], int(rest[1]), int(rest[2]))
        elif tag == "n":
            nodes[int(rest[0])] = int(rest[1])
        elif tag == "a":
            arcs.append(tuple(int(x) for x in rest))
        elif tag == "c" and rest[0] == "side-constraint":
            sides.append(" ".join(rest[1:]))
    return header, nodes, arcs, sides


def test_dimacs_export(example1):
    text = to_dimacs(network_of(example1))
    header, nodes, arcs, sides = parse_dimacs(text)
    assert header == ("min", 32, 129)
    assert len(arcs) == 129
    assert sum(nodes.values()) == 0
    assert nodes[1] == 2 and nodes[28] == -2
    # supply arcs of part 1 feed route-in nodes 6..8
    assert arcs[:3] == [(1, 6, 0, 1, 0), (1, 7, 0, 1, 0), (1, 8, 0, 1, 0)]
    assert (6, 17, 1, 1, 0) in arcs
    assert len(sides) == 11
    # route 1: supply arc (1, 6), demand arc (17, 28)
    assert sides[0] == "f(1,6) = f(17,28)"
    assert [line for line in text.splitlines() if line.startswith("p ")] == ["p min 32 129"]


def test_dimacs_smallest():
    inst = Instance.from_machine_sets(2, [[{1}], [{2}]])
    header, nodes, arcs, _ = parse_dimacs(to_dimacs(network_of(inst)))
    assert header == ("min", 8, 8)
    assert nodes == {}


@pytest.mark.parametrize("seed", range(10))
def test_arc_count_formula(seed):
    import numpy as np

    from .helpers import random_instance

    inst = random_instance(np.random.default_rng(seed))
    net = network_of(inst)
    assert len(net.nodes) == 2 * inst.part_count + 2 * inst.route_count
    assert len(net.arcs) == expected_arc_count(inst)
