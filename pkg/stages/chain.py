"""
Chain Construction Stage

Builds the layered Markov chains encoding a normalized three-dimensional
matrix-pair chain instance, and checks the good/bad subsystem properties.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from engine.mcp_search import evaluate, parse_selection
from engine.partition import SHAPE_PATH, DirectedTreePartition, validate_partition
from engine.reach import MODE_DTMC, reach_value
from errors import ValidationError
from models.markov import ProbabilisticModel, induce_subsystem, initial_value, underlying_graph
from models.mcp import McpInstance

logger = logging.getLogger(__name__)

VARIANT_M1 = "M1"
VARIANT_M2 = "M2"
AXES = ("x", "y", "z")
LEFT, RIGHT = 0, 1


def _next(a: int) -> int:
    """Circulant successor on the γ-cycle: x → y → z → x."""
    return (a + 1) % 3


@dataclass(frozen=True)
class LayeredChain:
    """
    A layered chain with two triples per layer, a final triple and a goal.

    Layer i (1-based) owns the left triple 6(i−1)+0..2 and the right triple
    6(i−1)+3..5; the final triple is 6n+0..2 and the goal state is 6n+3.
    """

    model: ProbabilisticModel
    instance: McpInstance
    variant: str
    gamma: Optional[Fraction] = None

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def epsilon(self) -> Fraction:
        return self.instance.epsilon

    @property
    def goal(self) -> int:
        return 6 * self.n + 3

    def triple(self, layer: int, side: int) -> Tuple[int, int, int]:
        base = 6 * (layer - 1) + 3 * side
        return base, base + 1, base + 2

    @property
    def final_triple(self) -> Tuple[int, int, int]:
        base = 6 * self.n
        return base, base + 1, base + 2


def _state_names(n: int) -> Dict[int, str]:
    names = {}
    for i in range(1, n + 1):
        for side, tag in ((LEFT, "l"), (RIGHT, "r")):
            for a, axis in enumerate(AXES):
                names[6 * (i - 1) + 3 * side + a] = f"{tag}{i}_{axis}"
    for a, axis in enumerate(AXES):
        names[6 * n + a] = f"{axis}{n + 1}"
    names[6 * n + 3] = "goal"
    return names


def _check_band(inst: McpInstance) -> None:
    if inst.dimension != 3 or inst.epsilon is None:
        raise ValidationError("chain construction needs a normalized 3-dimensional instance")
    low = Fraction(1, 12) - inst.epsilon
    outside = [x for x in inst.entries() if not low <= x <= Fraction(1, 12)]
    if outside:
        raise ValidationError(f"{len(outside)} entries outside [1/12 - eps, 1/12]")


def good_value_lower_bound(n: int, eps: Fraction) -> Fraction:
    """Smallest value a good subsystem can reach: 3^{n+1}·(1/12 − ε)^{n+2}."""
    return 3 ** (n + 1) * (Fraction(1, 12) - Fraction(eps)) ** (n + 2)


def _assemble(inst: McpInstance, weight, final_weight, gamma: Optional[Fraction]) -> ProbabilisticModel:
    """
    Layered DTMC where state a of a layer-j triple moves to state b of both
    next triples with weight(j, side, a, b); final state a reaches goal with
    final_weight(a). A γ-cycle is added to every triple when gamma is set.
    """
    n = inst.n
    rows: Dict[int, Dict[int, Fraction]] = {}

    def add_cycle(triple):
        if gamma is not None:
            for a in range(3):
                rows[triple[a]][triple[_next(a)]] = gamma

    for j in range(1, n + 1):
        for side in (LEFT, RIGHT):
            triple = tuple(6 * (j - 1) + 3 * side + a for a in range(3))
            for a in range(3):
                row = rows.setdefault(triple[a], {})
                if j < n:
                    targets = [tuple(6 * j + 3 * s + b for b in range(3)) for s in (LEFT, RIGHT)]
                else:
                    targets = [tuple(6 * n + b for b in range(3))]
                for target in targets:
                    for b in range(3):
                        row[target[b]] = weight(j, side, a, b)
            add_cycle(triple)

    final = tuple(6 * n + a for a in range(3))
    for a in range(3):
        rows.setdefault(final[a], {})[6 * n + 3] = final_weight(a)
    add_cycle(final)

    initial = {}
    for a in range(3):
        initial[a] = inst.iota[a]
        initial[3 + a] = inst.iota[a]
    return ProbabilisticModel.dtmc(rows, initial, [6 * n + 3], states=range(6 * n + 4),
                                   names=_state_names(n))


def build_m1(inst: McpInstance) -> LayeredChain:
    """
    Chain whose good subsystems reproduce the instance's selection values.

    Cross-layer probabilities are the matrix entries, the final triple
    reaches goal with the final vector and the initial vector is copied onto
    both first-layer triples.

    Raises:
        ValidationError: If the instance is not normalized
    """
    _check_band(inst)

    def weight(j, side, a, b):
        return inst.pairs[j - 1][side][a][b]

    model = _assemble(inst, weight, lambda a: inst.final[a], None)
    logger.debug("built M1 with %d states", len(model.states))
    return LayeredChain(model=model, instance=inst, variant=VARIANT_M1)


def select_gamma(n: int, eps: Fraction) -> Fraction:
    """
    Cycle probability γ with 1 − γ midway between 12ε and L/3.

    L is good_value_lower_bound; 3(1 − γ) < L separates bad from good
    subsystems and 12ε < 1 − γ keeps every transition positive.

    Raises:
        ValidationError: If the interval is empty
    """
    low = 12 * Fraction(eps)
    high = good_value_lower_bound(n, eps) / 3
    if not low < high:
        raise ValidationError(f"no admissible gamma for n={n}, eps={eps}")
    return 1 - (low + high) / 2


def build_m2(inst: McpInstance) -> LayeredChain:
    """
    Chain M1 with a γ-cycle inside every triple.

    From state a the cross-layer probability to b is M_a[b] − γ·M_next(a)[b]
    so that staying on the cycle until leaving reproduces M exactly; the
    final triple uses f_a − γ·f_next(a).

    Raises:
        ValidationError: If the instance is not normalized or no γ exists
    """
    _check_band(inst)
    gamma = select_gamma(inst.n, inst.epsilon)

    def weight(j, side, a, b):
        matrix = inst.pairs[j - 1][side]
        return matrix[a][b] - gamma * matrix[_next(a)][b]

    def final_weight(a):
        return inst.final[a] - gamma * inst.final[_next(a)]

    model = _assemble(inst, weight, final_weight, gamma)
    logger.debug("built M2 with %d states, gamma=%s", len(model.states), gamma)
    return LayeredChain(model=model, instance=inst, variant=VARIANT_M2, gamma=gamma)


def layer_partition(chain: LayeredChain) -> DirectedTreePartition:
    """Path partition: one block per layer, the final triple, the goal."""
    blocks: List[FrozenSet[int]] = []
    for i in range(1, chain.n + 1):
        blocks.append(frozenset(chain.triple(i, LEFT) + chain.triple(i, RIGHT)))
    blocks.append(frozenset(chain.final_triple))
    blocks.append(frozenset([chain.goal]))
    graph = underlying_graph(chain.model)
    return validate_partition(graph, blocks, chain.model.initial_support(), SHAPE_PATH)


def good_subsystem(chain: LayeredChain, sigma) -> FrozenSet[int]:
    """States of the selected triple per layer, the final triple and goal."""
    bits = parse_selection(sigma)
    if len(bits) != chain.n:
        raise ValidationError(f"selection has {len(bits)} bits for {chain.n} layers")
    states = set(chain.final_triple) | {chain.goal}
    for i, bit in enumerate(bits, start=1):
        states |= set(chain.triple(i, bit))
    return frozenset(states)


def is_good(chain: LayeredChain, kept: Iterable[int]) -> bool:
    """Whether kept is exactly S_σ for some selection σ."""
    kept = frozenset(kept)
    bits = []
    for i in range(1, chain.n + 1):
        left = set(chain.triple(i, LEFT)) <= kept
        right = set(chain.triple(i, RIGHT)) <= kept
        if left == right:
            return False
        bits.append(LEFT if left else RIGHT)
    return kept == good_subsystem(chain, bits)


def subsystem_probability(chain: LayeredChain, kept: Iterable[int]) -> Fraction:
    """Exact probability of reaching goal inside the subsystem."""
    sub = induce_subsystem(chain.model, kept)
    return initial_value(sub, reach_value(sub, MODE_DTMC))


def verify_good_value(chain: LayeredChain, sigma) -> Tuple[Fraction, Fraction]:
    """(chain probability of S_σ, instance value of σ), computed independently."""
    return subsystem_probability(chain, good_subsystem(chain, sigma)), evaluate(chain.instance, sigma)


def bad_subsystem_bound_check(chain: LayeredChain, kept: Iterable[int]) -> bool:
    """
    Whether a bad subsystem stays below every good one.

    True iff Pr_kept ≤ 3(1 − γ) < good_value_lower_bound.

    Raises:
        ValidationError: If chain is not M2, or kept is not a bad subsystem
            of size 3n+4 containing goal
    """
    kept = frozenset(kept)
    if chain.variant != VARIANT_M2:
        raise ValidationError("bad subsystem bound applies to M2 chains")
    if len(kept) != 3 * chain.n + 4 or chain.goal not in kept:
        raise ValidationError(f"expected {3 * chain.n + 4} states including goal")
    if is_good(chain, kept):
        raise ValidationError("subsystem is good")
    bound = 3 * (1 - chain.gamma)
    return subsystem_probability(chain, kept) <= bound < good_value_lower_bound(chain.n, chain.epsilon)


def good_subsystem_threshold(chain: LayeredChain) -> Fraction:
    """Threshold a good subsystem must reach: the instance threshold."""
    return chain.instance.threshold


def cycle_gadget_matrix(matrix, gamma: Fraction) -> List[List[Fraction]]:
    """
    Reach probabilities through one γ-cycle triple.

    Builds the triple 0,1,2 with its cycle and three target traps 3,4,5,
    where a moves to target b with M_a[b] − γ·M_next(a)[b], and returns the
    matrix of probabilities to reach each target from each triple state.
    """
    gamma = Fraction(gamma)
    rows: Dict[int, Dict[int, Fraction]] = {}
    for a in range(3):
        rows[a] = {_next(a): gamma}
        for b in range(3):
            rows[a][3 + b] = Fraction(matrix[a][b]) - gamma * Fraction(matrix[_next(a)][b])
    result = [[Fraction(0)] * 3 for _ in range(3)]
    for b in range(3):
        model = ProbabilisticModel.dtmc(rows, {0: Fraction(1)}, [3 + b], states=range(6))
        values = reach_value(model, MODE_DTMC)
        for a in range(3):
            result[a][b] = values[a]
    return result
