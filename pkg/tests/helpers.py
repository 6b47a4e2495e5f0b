"""Independent reference computations and invariant checks for the tests.

Nothing here calls the code paths it is used to check: the family cover is
found by plain permutation enumeration and the cell assignment by
enumerating every labelling of families and machines.
"""

from __future__ import annotations

import itertools

import numpy as np

from cellgroup import Instance, machines_of
from cellgroup.family import flow_violations


def hamming(instance: Instance, i: int, j: int) -> int:
    return len(machines_of(instance, i) ^ machines_of(instance, j))


def enumerate_family_optimum(instance: Instance) -> int:
    """Cheapest derangement cost over every route selection, by permutations."""
    K = instance.part_count
    best = None
    for chosen in itertools.product(*instance.parts):
        for perm in itertools.permutations(range(K)):
            if any(perm[k] == k for k in range(K)):
                continue
            cost = sum(hamming(instance, chosen[k], chosen[perm[k]]) for k in range(K))
            if best is None or cost < best:
                best = cost
    return best


def enumerate_qap_optimum(u: np.ndarray, max_cells: int, max_per_cell: int) -> int:
    """Maximum utilization over all (Y, Z) labellings that respect the cap."""
    M, R = u.shape
    Z = np.array(list(itertools.product(range(max_cells), repeat=M)), dtype=int).reshape(-1, M)
    counts = np.stack([(Z == c).sum(axis=1) for c in range(max_cells)], axis=1)
    Z = Z[counts.max(axis=1) <= max_per_cell]
    Y = np.array(list(itertools.product(range(max_cells), repeat=R)), dtype=int).reshape(-1, R)
    z_hot = (Z[:, :, None] == np.arange(max_cells)).astype(np.int64)
    y_hot = (Y[:, :, None] == np.arange(max_cells)).astype(np.int64)
    # value[z, y] = sum over m, r, c of [Z_m = c] u[m, r] [Y_r = c]
    value = np.einsum("zmc,mr,yrc->zy", z_hot, np.asarray(u, dtype=np.int64), y_hot)
    return int(value.max())


def random_instance(rng: np.random.Generator, parts=(2, 6), routes=(1, 3), machines=(3, 8)) -> Instance:
    M = int(rng.integers(machines[0], machines[1] + 1))
    K = int(rng.integers(parts[0], parts[1] + 1))
    sets = []
    for _ in range(K):
        n = int(rng.integers(routes[0], routes[1] + 1))
        part = []
        for _ in range(n):
            size = int(rng.integers(1, M + 1))
            part.append(set((rng.choice(M, size=size, replace=False) + 1).tolist()))
        sets.append(part)
    return Instance.from_machine_sets(M, sets)


def check_flow(solution) -> None:
    problems = flow_violations(solution)
    assert not problems, problems


def check_families(instance: Instance, families) -> None:
    selected = families.selected_route
    assert sorted(selected) == list(range(1, instance.part_count + 1))
    for k, i in selected.items():
        assert i in instance.routes_of(k)
    members = [i for f in families.families for i in f]
    assert sorted(members) == sorted(selected.values())
    for f in families.families:
        assert len(f) >= 2
        owners = [instance.part_of(i) for i in f]
        assert len(set(owners)) == len(owners)


def check_cells(solution, machine_count: int, family_count: int, config) -> None:
    assert sorted(solution.machine_cell) == list(range(1, machine_count + 1))
    assert sorted(solution.family_cell) == list(range(1, family_count + 1))
    sizes = np.bincount(list(solution.machine_cell.values()))
    assert sizes.max(initial=0) <= config.max_per_cell
    used = set(solution.machine_cell.values()) | set(solution.family_cell.values())
    assert used == set(range(1, solution.cell_count_used + 1))
    assert solution.cell_count_used <= config.max_cells
