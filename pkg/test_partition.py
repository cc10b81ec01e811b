#!/usr/bin/env python3
"""
Test partition validation, navigation and width computation.
"""

import random

import pytest

from config import Config
from engine.partition import (
    SHAPE_PATH, SHAPE_TREE, bisection_gadget, enumerate_partition_widths, exact_width,
    has_oneway_bisection, heuristic_layer_partition, merge_root_blocks, split_goal_blocks,
    validate_partition, width,
)
from errors import CapExceededError, PartitionError, PartitionViolation
from models.markov import UnderlyingGraph


def graph(n, edges):
    return UnderlyingGraph.from_edges(range(n), edges)


def random_graph(rng: random.Random, n: int, density: float = 0.3) -> UnderlyingGraph:
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < density]
    return graph(n, edges)


CYCLE3 = graph(3, [(0, 1), (1, 2), (2, 0)])


def test_validate_partition_verdicts():
    """One diagnostic per violated condition."""

    p = validate_partition(CYCLE3, [[0, 1, 2]])
    assert width(p) == 3 and p.shape == SHAPE_PATH
    print("✅ 3-cycle in one block: valid, width 3")

    cases = [
        (CYCLE3, [[0, 1], [2]], PartitionViolation.QUOTIENT_TWO_CYCLE),
        (CYCLE3, [[0, 1]], PartitionViolation.COVERAGE),
        (CYCLE3, [[0, 1], [1, 2]], PartitionViolation.DISJOINTNESS),
        (CYCLE3, [[0, 1, 2], []], PartitionViolation.EMPTY_BLOCK),
        (CYCLE3, [[0, 1, 2, 5]], PartitionViolation.UNKNOWN_STATE),
        (graph(3, [(0, 2), (1, 2)]), [[0], [1], [2]], PartitionViolation.IN_DEGREE),
        (graph(4, [(0, 1), (1, 2), (2, 3), (3, 1)]), [[0], [1], [2], [3]], PartitionViolation.IN_DEGREE),
        (graph(2, []), [[0], [1]], PartitionViolation.MULTIPLE_ROOTS),
        (graph(3, [(0, 1), (0, 2)]), [[0], [1], [2]], None),
    ]
    for g, blocks, expected in cases:
        if expected is None:
            validate_partition(g, blocks)
            with pytest.raises(PartitionError) as info:
                validate_partition(g, blocks, shape=SHAPE_PATH)
            assert info.value.reason == PartitionViolation.NOT_PATH
            continue
        with pytest.raises(PartitionError) as info:
            validate_partition(g, blocks)
        assert info.value.reason == expected, f"{blocks}: got {info.value.reason}"
        print(f"  ✅ {blocks} -> {info.value}")
    print("✅ Every violation reported by name")


def test_navigation():
    """inc/out/exit/cl on a small tree."""
    # root {0,1} -> {2,3} and root -> {4}; 3 -> 5 inside a leaf
    g = graph(6, [(0, 1), (1, 2), (2, 3), (0, 4), (3, 5), (5, 3)])
    p = validate_partition(g, [[0, 1], [2], [4], [3, 5]], initial=[0])
    assert p.root == 0 and p.children(0) == (1, 2) and p.parent(3) == 1
    assert p.inc(0) == {0} and p.inc(1) == {2} and p.inc(3) == {3}
    assert p.out(0) == {2, 4}
    assert p.exit(0) == {0, 1} and p.exit(3) == frozenset()
    assert p.cl(1) == {2, 3, 5}
    assert p.block_of(5) == 3
    order = p.topological_order()
    assert order[0] == 0 and order.index(1) < order.index(3)
    assert p.reverse_topological_order() == list(reversed(order))
    print(f"✅ Navigation consistent, order {order}")


def test_exact_width_examples():
    """Paths, SCCs and the vertex cap."""
    path = graph(3, [(0, 1), (1, 2)])
    value, p = exact_width(path, SHAPE_PATH)
    assert value == 1 and width(p) == 1
    print("✅ Directed path has width 1")

    for k in (2, 4, 5):
        cycle = graph(k, [(i, (i + 1) % k) for i in range(k)])
        assert exact_width(cycle)[0] == k
    print("✅ A k-cycle has width k")

    assert exact_width(graph(0, [])) == (0, None)
    print("✅ Empty graph has width 0")

    with pytest.raises(CapExceededError):
        exact_width(graph(5, []), config=Config(exact_width_cap=4))
    print("✅ Cap enforced")


def test_exact_width_matches_enumeration():
    """Branch and bound agrees with plain set-partition enumeration."""
    rng = random.Random(11)
    for trial in range(100):
        n = rng.randint(1, 6)
        g = random_graph(rng, n, rng.choice([0.15, 0.3, 0.45]))
        for shape in (SHAPE_TREE, SHAPE_PATH):
            expected = enumerate_partition_widths(g, shape)
            value, p = exact_width(g, shape)
            assert value == expected, f"trial {trial} {shape}: {value} != {expected}"
            assert width(validate_partition(g, p.blocks, shape=shape)) == value
        assert exact_width(g, SHAPE_PATH)[0] >= exact_width(g, SHAPE_TREE)[0]
    print("✅ 100 random graphs: exact width equals enumeration, path >= tree")


def test_bisection_gadget():
    """Gadget construction and the one-way bisection equivalence."""
    g = graph(2, [(0, 1)])
    gadget = bisection_gadget(g)
    assert gadget.edges == frozenset({(0, 1), (2, 0), (2, 1), (0, 3), (1, 3)})
    assert len(gadget.vertices) == 4
    print("✅ u->v gadget edges")

    rng = random.Random(5)
    for trial in range(50):
        g = random_graph(rng, 6, rng.choice([0.2, 0.35, 0.5]))
        gadget = bisection_gadget(g)
        assert len(gadget.edges) == len(g.edges) + 2 * len(g.vertices)
        small = exact_width(gadget, SHAPE_PATH)[0] <= len(g.vertices) // 2 + 1
        assert small == has_oneway_bisection(g), f"trial {trial}"
    print("✅ 50 random 6-vertex graphs: path width bound iff one-way bisection")


def test_heuristic_layer_partition():
    """Levels on DAGs, one block for an SCC."""
    dag = graph(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)])
    p = heuristic_layer_partition(dag, initial=[0])
    assert [sorted(b) for b in p.blocks] == [[0], [1, 2], [3], [4]]
    print("✅ DAG split into topological levels")

    p = heuristic_layer_partition(CYCLE3)
    assert len(p.blocks) == 1
    print("✅ Strongly connected graph stays in one block")

    # two sources feeding one sink
    p = heuristic_layer_partition(graph(3, [(0, 2), (1, 2)]))
    assert validate_partition(p.graph, p.blocks) is not None
    print(f"✅ Invalid levels merged: {[sorted(b) for b in p.blocks]}")


def test_merge_and_split_helpers():
    """Root merging reports the width increase; goal splitting keeps the tree."""
    g = graph(4, [(0, 2), (1, 2), (2, 3)])
    p, increase = merge_root_blocks(g, [[0], [1], [2], [3]], initial=[0])
    assert sorted(p.blocks[p.root]) == [0, 1] and increase == 1
    print("✅ Two roots merged, width +1")

    g = graph(3, [(0, 1), (0, 2)])
    mixed = validate_partition(g, [[0], [1, 2]], initial=[0])
    fixed = split_goal_blocks(g, mixed, goal=[2])
    assert [sorted(b) for b in fixed.blocks] == [[0], [1], [2]]
    print("✅ Goal state moved to its own block")

    chain = graph(3, [(0, 1), (1, 2), (0, 2)])
    mixed = validate_partition(chain, [[0], [1, 2]], initial=[0])
    with pytest.raises(PartitionError) as info:
        split_goal_blocks(chain, mixed, goal=[2])
    assert info.value.reason == PartitionViolation.GOAL_SPLIT
    print("✅ Split refused when it breaks the tree")


if __name__ == '__main__':
    test_validate_partition_verdicts()
    test_navigation()
    test_exact_width_examples()
    test_exact_width_matches_enumeration()
    test_bisection_gadget()
    test_heuristic_layer_partition()
    test_merge_and_split_helpers()
    print("\n✅ All partition tests passed")
