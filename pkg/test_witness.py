#!/usr/bin/env python3
"""
Test the tree witness solver against the brute-force baseline.
"""

from fractions import Fraction

import pytest

from config import Config
from engine.baseline import brute_force_witness
from engine.generate import generate_layered_model, random_tree_partition_model
from engine.partition import validate_partition
from engine.witness import (
    KEEP, PRUNE_DISTANCE, PRUNE_NONE, PRUNE_VALUE, QUERY_MODES, BlockTable, WitnessQuery,
    greedy_upper_bound, phi_models, prune_partial, solve, subsystem_value, successor_points,
)
from errors import CapExceededError, PartitionError, PartitionViolation, ValidationError
from models.markov import ProbabilisticModel, underlying_graph
from models.partial import PartialSubsystem

F = Fraction


def three_state():
    """s0 -> s1 -> g with probability 1/2 each."""
    return ProbabilisticModel.dtmc({0: {1: F(1, 2)}, 1: {2: F(1, 2)}}, {0: F(1)}, [2], states=range(3))


def query_for(model, blocks, mode, threshold, **options):
    p = validate_partition(underlying_graph(model), blocks, model.initial_support())
    return WitnessQuery(model=model, partition=p, mode=mode, threshold=threshold, **options)


def test_three_state_chain():
    m = three_state()
    result = solve(query_for(m, [[0], [1], [2]], "dtmc", F(1, 4)))
    assert result.feasible and result.states == {0, 1, 2} and result.value == F(1, 4)
    print("✅ λ=1/4: witness {s0, s1, g} with value 1/4")

    result = solve(query_for(m, [[0], [1], [2]], "dtmc", F(0)))
    assert result.feasible and result.states == {0, 1, 2} and result.value == F(1, 4)
    assert brute_force_witness(m, "dtmc", F(0)).states == result.states
    print("✅ λ=0: the goal path s0 s1 g, not the empty set")

    detour = ProbabilisticModel.dtmc({0: {1: F(1, 2), 2: F(1, 2)}, 1: {3: F(1, 10)}, 2: {4: F(1)}, 4: {5: F(1)}},
                                     {0: F(1)}, [3, 5], states=range(6))
    result = solve(query_for(detour, [[0], [1], [2, 4], [3], [5]], "dtmc", F(0)))
    assert result.states == {0, 1, 3} and result.value == F(1, 20)
    print("✅ λ=0 takes the shortest goal path even when its value is small")

    stuck = ProbabilisticModel.dtmc({0: {1: F(1)}}, {0: F(1)}, [2], states=range(3))
    result = brute_force_witness(stuck, "dtmc", F(0))
    assert result.feasible and result.size == 0
    print("✅ λ=0 with Goal unreachable: empty witness")

    result = solve(query_for(m, [[0], [1], [2]], "dtmc", F(1, 2)))
    assert not result.feasible and result.value == F(1, 4)
    print("✅ λ=1/2: infeasible, full system reaches 1/4")

    baseline = brute_force_witness(m, "dtmc", F(1, 4))
    assert baseline.states == {0, 1, 2}
    print("✅ Baseline agrees")


def test_phi_models():
    """Structural filter on single and linear blocks."""
    g = underlying_graph(ProbabilisticModel.dtmc({0: {1: F(1)}, 1: {2: F(1)}, 2: {3: F(1)}},
                                                 {0: F(1)}, [3], states=range(4)))
    p = validate_partition(g, [[0, 1, 2], [3]], initial=[0])
    assert list(phi_models(p, 0, frozenset({3}), frozenset({0}))) == [frozenset(), frozenset({0, 1, 2})]
    print("✅ Linear block: only the empty set and the whole block")

    p = validate_partition(g, [[0], [1], [2], [3]], initial=[0])
    assert list(phi_models(p, 1)) == [frozenset(), frozenset({1})]
    print("✅ Entry-and-exit singleton: both subsets")


def test_successor_points():
    g = underlying_graph(ProbabilisticModel.dtmc({0: {1: F(1, 2), 2: F(1, 2)}}, {0: F(1)}, [], states=range(3)))
    p = validate_partition(g, [[0], [1], [2]], initial=[0])
    table = BlockTable()
    table.insert(1, [PartialSubsystem.empty((1,), F(0)),
                     PartialSubsystem((1,), frozenset({1}), (F(1, 2),))])
    table.insert(2, [PartialSubsystem((2,), frozenset({2}), (F(k, 4),)) for k in range(1, 4)])

    assert list(successor_points(table, p, 1)) == [(frozenset(), {})]
    print("✅ Leaf block yields one empty combination")

    combos = list(successor_points(table, p, 0))
    assert len(combos) == 6
    assert (frozenset({1, 2}), {1: F(1, 2), 2: F(3, 4)}) in combos
    print("✅ 2 x 3 survivors give 6 combinations")


def test_prune_partial():
    m = three_state()
    query = query_for(m, [[0], [1], [2]], "dtmc", F(1, 2), prune=PRUNE_VALUE)
    low = PartialSubsystem((1,), frozenset({1, 2}), (F(1, 10),))
    assert prune_partial(query, 1, low, {}, None) == PRUNE_VALUE
    high = PartialSubsystem((1,), frozenset({1, 2}), (F(3, 5),))
    assert prune_partial(query, 1, high, {}, None) == KEEP
    print("✅ Value bound drops 1/10 < 1/2 with Goal below")

    query = query_for(m, [[0], [1], [2]], "dtmc", F(1, 2), prune=PRUNE_DISTANCE)
    candidate = PartialSubsystem((1,), frozenset({1, 2}), (F(1, 10),))
    assert prune_partial(query, 1, candidate, {1: 4}, 5) == PRUNE_DISTANCE
    assert prune_partial(query, 1, candidate, {1: 3}, 5) == KEEP
    print("✅ Distance bound drops 4 + 2 > 5")


@pytest.mark.parametrize("kind,mode", [("dtmc", "dtmc"), ("mdp", "mdp-max"), ("mdp", "mdp-min")])
def test_matches_baseline_on_random_trees(kind, mode):
    """Same minimal size as exhaustive search, with and without pruning."""
    for seed in range(14):
        m, blocks = random_tree_partition_model(8 + seed % 5, seed, kind)
        full = subsystem_value(m, m.states, QUERY_MODES[mode][0])
        previous = 0
        for k in (0, 1, 2, 3, 4):
            threshold = full * F(k, 4)
            expected = brute_force_witness(m, mode, threshold)
            result = solve(query_for(m, blocks, mode, threshold))
            unpruned = solve(query_for(m, blocks, mode, threshold, prune=PRUNE_NONE))
            assert result.feasible == expected.feasible
            assert result.size == expected.size == unpruned.size, f"seed {seed} λ={threshold}"
            if result.feasible:
                assert result.value >= threshold
                assert result.size >= previous, "Size monotone in λ"
                previous = result.size
    print(f"✅ {mode}: solver, unpruned solver and baseline agree on 70 instances (14 trees, 5 thresholds)")


def test_layered_against_baseline():
    for seed in range(4):
        m, blocks = generate_layered_model(4, 3, "dtmc", seed)
        full = subsystem_value(m, m.states, "dtmc")
        threshold = full * F(2, 3)
        result = solve(query_for(m, blocks, "dtmc", threshold))
        assert result.size == brute_force_witness(m, "dtmc", threshold).size
        upper = greedy_upper_bound(m, "dtmc", threshold)
        assert upper.feasible and upper.size >= result.size
    print("✅ Layered chains: solver matches baseline, greedy bound holds")


def test_query_errors():
    m = three_state()
    with pytest.raises(ValidationError):
        solve(query_for(m, [[0], [1], [2]], "mdp-min", F(1, 4)))
    print("✅ mdp-min refused on a DTMC")

    wide = ProbabilisticModel.dtmc({0: {1: F(1, 2), 2: F(1, 2)}, 1: {3: F(1)}, 2: {3: F(1)}},
                                   {0: F(1)}, [3], states=range(4))
    with pytest.raises(CapExceededError):
        solve(query_for(wide, [[0], [1, 2], [3]], "dtmc", F(1, 2), config=Config(interface_cap=1)))
    print("✅ Interface cap enforced")

    shifted = ProbabilisticModel.dtmc({0: {1: F(1, 2)}, 1: {2: F(1, 2)}}, {1: F(1)}, [2], states=range(3))
    p = validate_partition(underlying_graph(shifted), [[0], [1], [2]])
    with pytest.raises(PartitionError) as info:
        solve(WitnessQuery(model=shifted, partition=p, mode="dtmc", threshold=F(1, 4)))
    assert info.value.reason == PartitionViolation.INITIAL_OUTSIDE_ROOT
    print("✅ Initial state outside the root block rejected")

    with pytest.raises(ValidationError):
        solve(query_for(m, [[0], [1], [2]], "dtmc", F(3, 2)))
    print("✅ Threshold above one rejected")


if __name__ == '__main__':
    test_three_state_chain()
    test_phi_models()
    test_successor_points()
    test_prune_partial()
    for kind, mode in [("dtmc", "dtmc"), ("mdp", "mdp-max"), ("mdp", "mdp-min")]:
        test_matches_baseline_on_random_trees(kind, mode)
    test_layered_against_baseline()
    test_query_errors()
    print("\n✅ All witness tests passed")
