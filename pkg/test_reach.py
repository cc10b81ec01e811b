#!/usr/bin/env python3
"""
Test reachability values, the assumption transform and the value-function laws.
"""

import random
from fractions import Fraction

import numpy as np
import pytest

from engine.generate import generate_layered_model
from engine.reach import (
    InterfaceAssumption, apply_assumption, can_reach_goal, maximal_end_components, reach_value,
    value_with_assumption,
)
from errors import ValidationError
from models.markov import ProbabilisticModel, validate_model
from models.scalar import Arithmetic

F = Fraction


def random_dtmc(rng: random.Random, n: int = 10) -> ProbabilisticModel:
    """Random substochastic DTMC with goal states n-2 and n-1."""
    rows = {}
    for s in range(n - 2):
        targets = rng.sample(range(n), rng.randint(1, 3))
        weights = [rng.randint(1, 5) for _ in targets]
        mass = F(rng.randint(5, 10), 10)
        rows[s] = {t: mass * w / sum(weights) for t, w in zip(targets, weights)}
    return ProbabilisticModel.dtmc(rows, {0: F(1)}, [n - 2, n - 1], states=range(n))


def test_basic_values():
    """Goal states and one-step chains."""
    m = ProbabilisticModel.dtmc({0: {1: F(1, 2), 2: F(1, 2)}}, {0: F(1)}, [1], states=range(3))
    values = reach_value(m, "dtmc")
    assert values[1] == 1, "Goal state has value 1"
    assert values[0] == F(1, 2), "One step with probability 1/2"
    assert values[2] == 0, "Dead end has value 0"
    print("✅ Goal 1, gambler step 1/2, dead end 0")

    with pytest.raises(ValidationError):
        reach_value(ProbabilisticModel.mdp({}, {0: F(1)}, [0], states=[0]), "dtmc")
    print("✅ Mode dtmc refused for an MDP")


def test_random_dtmc_fixed_point():
    """Exact values satisfy x = P·x on every state that can reach Goal."""
    rng = random.Random(7)
    for trial in range(20):
        m = random_dtmc(rng)
        assert validate_model(m) == []
        values = reach_value(m, "dtmc")
        for s in m.states:
            if s in m.goal:
                assert values[s] == 1
                continue
            expected = sum((p * values[t] for t, p in m.distribution(s, "tau").items()), F(0))
            assert values[s] == expected, f"trial {trial}: fixed point fails at {s}"
    print("✅ 20 random 10-state chains solve their linear equations exactly")


def test_dtmc_matches_dense_solve():
    """Exact values against a float solve of (I − P)x = b over the states that can reach Goal."""
    rng = random.Random(19)
    for trial in range(30):
        m = random_dtmc(rng, rng.randint(4, 12))
        values = reach_value(m, "dtmc")
        unknown = sorted(can_reach_goal(m))
        index = {s: i for i, s in enumerate(unknown)}
        p = np.zeros((len(unknown), len(unknown)))
        b = np.zeros(len(unknown))
        for s in unknown:
            for t, prob in m.distribution(s, "tau").items():
                if t in m.goal:
                    b[index[s]] += float(prob)
                elif t in index:
                    p[index[s], index[t]] += float(prob)
        x = np.linalg.solve(np.eye(len(unknown)) - p, b) if unknown else b
        for s in m.states:
            if s in m.goal:
                expected = 1.0
            else:
                expected = x[index[s]] if s in index else 0.0
            assert abs(float(values[s]) - expected) < 1e-9, f"trial {trial}: state {s}"
    print("✅ 30 random chains agree with a dense numpy solve")


def test_dtmc_additivity():
    """Pr under f1 plus Pr under f2 equals Pr under f1 + f2."""
    rng = random.Random(31)
    for seed in range(20):
        m, blocks = generate_layered_model(4, 3, "dtmc", seed)
        upper = {s for block in blocks[:2] for s in block}
        boundary = sorted(blocks[2])
        f1 = InterfaceAssumption({q: F(rng.randint(0, 5), 10) for q in boundary})
        f2 = InterfaceAssumption({q: F(rng.randint(0, 5), 10) for q in boundary})
        kept = upper | set(boundary)
        v1 = value_with_assumption(m, kept, f1, "dtmc")
        v2 = value_with_assumption(m, kept, f2, "dtmc")
        v12 = value_with_assumption(m, kept, f1.plus(f2), "dtmc")
        for s in upper:
            assert v1[s] + v2[s] == v12[s], f"seed {seed}: state {s}"
    print("✅ 20 layered chains: DTMC values are additive in the assumption")


def test_float_mode_agrees_with_exact():
    """Interval iteration with end components matches policy iteration."""
    m = ProbabilisticModel.mdp(
        {0: {"stay": {0: F(1)}, "go": {1: F(1, 2), 2: F(1, 2)}},
         2: {"back": {0: F(1)}, "drop": {3: F(1)}}},
        {0: F(1)}, [1], states=range(4))
    exact = reach_value(m, "max")
    approx = reach_value(m, "max", Arithmetic.float_mode())
    assert exact[0] == 1, "Retrying through state 2 reaches Goal almost surely"
    for s in m.states:
        assert abs(float(exact[s]) - approx[s]) < 1e-6, f"state {s}: {exact[s]} vs {approx[s]}"
    print(f"✅ max values agree: {approx}")

    minimum = reach_value(m, "min")
    assert minimum[0] == 0, "Staying forever avoids Goal"
    print("✅ min value 0 via the self loop")

    components = maximal_end_components(m, {0, 2})
    assert [states for states, _ in components] == [frozenset({0})]
    print("✅ Only the self loop at 0 forms an end component")


def test_apply_assumption():
    """Assumed values replace outgoing edges."""
    m = ProbabilisticModel.dtmc({0: {1: F(1, 2)}, 1: {2: F(1)}}, {0: F(1)}, [], states=range(3))
    f = InterfaceAssumption({1: F(2, 5)})
    values = value_with_assumption(m, {0, 1}, f, "dtmc")
    assert values[0] == F(1, 5), f"Expected 1/5, got {values[0]}"
    print("✅ s0 -> s1 (1/2) with f(s1)=2/5 gives 1/5")

    zero = value_with_assumption(m, {0, 1}, InterfaceAssumption({1: F(0)}), "dtmc")
    assert zero[0] == 0
    print("✅ Zero assumption gives zero")

    transformed = apply_assumption(m, {0, 1}, f)
    assert transformed.goal == frozenset({3}), "Fresh target above the largest id"
    assert transformed.distribution(1, "tau") == {3: F(2, 5)}

    with pytest.raises(ValidationError):
        apply_assumption(m, {0}, f)
    print("✅ Assumption outside the subsystem rejected")

    for bad in (F(6, 5), F(-1, 10), 1.5):
        with pytest.raises(ValidationError):
            InterfaceAssumption({1: bad})
    with pytest.raises(ValidationError):
        InterfaceAssumption({1: F(3, 5)}).plus(InterfaceAssumption({1: F(1, 2)}))
    print("✅ Assumed values outside [0,1] rejected")


@pytest.mark.parametrize("kind,mode", [("dtmc", "dtmc"), ("mdp", "max"), ("mdp", "min")])
def test_composition_at_layer_cut(kind, mode):
    """Values below a cut, assumed on the cut, reproduce the unsplit values."""
    for seed in range(34):
        m, blocks = generate_layered_model(5, 3, kind, seed)
        full = reach_value(m, mode)
        for cut in (1, 2, 3):
            upper = {s for block in blocks[:cut] for s in block}
            boundary = set(blocks[cut])
            f = InterfaceAssumption({q: full[q] for q in boundary})
            local = value_with_assumption(m, upper | boundary, f, mode)
            for s in upper:
                assert local[s] == full[s], f"seed {seed} cut {cut}: state {s}"

            # homogeneity and monotonicity
            halved = value_with_assumption(m, upper | boundary, f.scaled(F(1, 2)), mode)
            lowered = InterfaceAssumption({q: v / 3 if q == min(boundary) else v for q, v in f.value.items()})
            smaller = value_with_assumption(m, upper | boundary, lowered, mode)
            for s in upper:
                assert halved[s] == local[s] / 2
                assert smaller[s] <= local[s]
    print(f"✅ {kind}/{mode}: composition, homogeneity and monotonicity hold exactly on 102 cuts")


def test_min_value_not_subadditive():
    """Two single-successor actions: min is 1/2 under f1+f2 but 0 under each."""
    m = ProbabilisticModel.mdp({0: {"a": {1: F(1)}, "b": {2: F(1)}}}, {0: F(1)}, [], states=range(3))
    f1 = InterfaceAssumption({1: F(0), 2: F(1, 2)})
    f2 = InterfaceAssumption({1: F(1, 2), 2: F(0)})
    kept = {0, 1, 2}

    v1 = value_with_assumption(m, kept, f1, "min")[0]
    v2 = value_with_assumption(m, kept, f2, "min")[0]
    v3 = value_with_assumption(m, kept, f1.plus(f2), "min")[0]
    assert (v1, v2, v3) == (0, 0, F(1, 2)), f"Got {v1}, {v2}, {v3}"
    print(f"✅ min: {v3} > {v1} + {v2}")

    w1 = value_with_assumption(m, kept, f1, "max")[0]
    w2 = value_with_assumption(m, kept, f2, "max")[0]
    w3 = value_with_assumption(m, kept, f1.plus(f2), "max")[0]
    assert w3 <= w1 + w2
    print(f"✅ max stays subadditive: {w3} <= {w1} + {w2}")


if __name__ == '__main__':
    test_basic_values()
    test_random_dtmc_fixed_point()
    test_dtmc_matches_dense_solve()
    test_dtmc_additivity()
    test_float_mode_agrees_with_exact()
    test_apply_assumption()
    for kind, mode in [("dtmc", "dtmc"), ("mdp", "max"), ("mdp", "min")]:
        test_composition_at_layer_cut(kind, mode)
    test_min_value_not_subadditive()
    print("\n✅ All reach tests passed")
