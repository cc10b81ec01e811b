"""
Tree Witness Solver

Minimal witnessing subsystems by a bottom-up pass over a directed tree
partition, keeping only non-dominated partial subsystems per block.
"""

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import networkx as nx

from config import Config, resolve
from engine.hull import STANDARD, STRONG, remove_dominated
from engine.partition import DirectedTreePartition, check_goal_blocks
from engine.reach import (
    MODE_DTMC, MODE_MAX, MODE_MIN, InterfaceAssumption, reach_value, value_with_assumption,
)
from errors import CapExceededError, PartitionError, PartitionViolation, ValidationError
from models.markov import ProbabilisticModel, induce_subsystem, initial_value, relevant_states, validate_model
from models.partial import PartialSubsystem
from models.result import WitnessResult
from models.scalar import EXACT, Arithmetic, Scalar

logger = logging.getLogger(__name__)

# query mode -> (reach mode, domination mode)
QUERY_MODES = {
    "dtmc": (MODE_DTMC, STANDARD),
    "mdp-max": (MODE_MAX, STANDARD),
    "mdp-min": (MODE_MIN, STRONG),
}

PRUNE_NONE = "none"
PRUNE_VALUE = "value"
PRUNE_DISTANCE = "distance"
PRUNE_ALL = "all"
PRUNE_OPTIONS = (PRUNE_NONE, PRUNE_VALUE, PRUNE_DISTANCE, PRUNE_ALL)

KEEP = "keep"


@dataclass
class WitnessQuery:
    """Model, partition, mode and threshold of one witness search."""

    model: ProbabilisticModel
    partition: DirectedTreePartition
    mode: str
    threshold: Scalar
    arith: Arithmetic = EXACT
    prune: str = PRUNE_ALL
    upper_bound: Optional[int] = None
    config: Optional[Config] = None

    @property
    def reach_mode(self) -> str:
        return QUERY_MODES[self.mode][0]

    @property
    def domination(self) -> str:
        return QUERY_MODES[self.mode][1]


@dataclass
class BlockTable:
    """Surviving partial subsystems per processed block."""

    entries: Dict[int, List[PartialSubsystem]] = field(default_factory=dict)

    def survivors(self, block: int) -> List[PartialSubsystem]:
        return self.entries[block]

    def insert(self, block: int, survivors: List[PartialSubsystem]) -> None:
        self.entries[block] = survivors

    def counts(self) -> Dict[int, int]:
        return {b: len(s) for b, s in sorted(self.entries.items())}


def interface_of(query: WitnessQuery, block: int) -> Tuple[int, ...]:
    """inc(B), with the initial support added for the root."""
    p = query.partition
    interface = set(p.inc(block))
    if block == p.root:
        interface |= query.model.initial_support()
    return tuple(sorted(interface))


def validate_query(query: WitnessQuery) -> None:
    """
    Check a query before solving.

    Raises:
        ValidationError: Unknown mode or prune option, mode/model mismatch,
            invalid model, threshold outside [0,1]
        PartitionError: Partition does not match the model, initial state
            outside the root block, goal-block condition violated
        CapExceededError: A block interface exceeds the interface cap
    """
    config = resolve(query.config)
    m = query.model
    if query.mode not in QUERY_MODES:
        raise ValidationError(f"unknown mode '{query.mode}' (expected one of {', '.join(QUERY_MODES)})")
    if query.prune not in PRUNE_OPTIONS:
        raise ValidationError(f"unknown prune option '{query.prune}'")
    if (query.mode == "dtmc") != m.is_dtmc:
        raise ValidationError(f"mode {query.mode} does not apply to a {m.kind} model")
    violations = validate_model(m)
    if violations:
        raise ValidationError("invalid model: " + "; ".join(violations))
    if query.threshold < 0 or query.threshold > 1:
        raise ValidationError("threshold must lie in [0,1]")

    p = query.partition
    if set(p.graph.vertices) != set(m.states):
        raise PartitionError(PartitionViolation.COVERAGE, "partition does not cover the model states")
    outside = m.initial_support() - p.blocks[p.root]
    if outside:
        raise PartitionError(PartitionViolation.INITIAL_OUTSIDE_ROOT, f"states {sorted(outside)}")
    check_goal_blocks(p, m.goal)

    for b in range(len(p.blocks)):
        size = len(interface_of(query, b))
        if size > config.interface_cap:
            raise CapExceededError("interface", config.interface_cap, size,
                                   f"block {b}: refine the partition")


def meets_threshold(value: Scalar, threshold: Scalar, arith: Arithmetic = EXACT) -> bool:
    """
    value ≥ λ, or value > 0 when λ = 0.

    A zero threshold still asks for a subsystem that reaches Goal, so the
    answer is the smallest goal-reaching skeleton rather than the empty set.
    """
    if arith.gt(threshold, arith.zero):
        return arith.ge(value, threshold)
    return arith.gt(value, arith.zero)


def subsystem_value(m: ProbabilisticModel, kept, reach_mode: str, arith: Arithmetic = EXACT,
                    config: Optional[Config] = None) -> Scalar:
    """Reach value of the subsystem induced by kept, from the initial distribution."""
    sub = induce_subsystem(m, kept)
    return initial_value(sub, reach_value(sub.map_probabilities(arith.coerce), reach_mode, arith, config))


def phi_models(p: DirectedTreePartition, block: int, goal: FrozenSet[int] = frozenset(),
               initial: FrozenSet[int] = frozenset()) -> Iterator[FrozenSet[int]]:
    """
    Subsets of a block passing the structural filter.

    A kept state outside inc(B) needs a kept predecessor in B; a kept state
    that is neither an exit nor a goal state needs a kept successor in B.
    Subsets come in a fixed order starting with the empty set.
    """
    states = sorted(p.blocks[block])
    members = set(states)
    inc = p.inc(block) | (initial & members)
    exits = p.exit(block)

    # clause: state -> any of literals
    clauses: Dict[int, List[Tuple[int, Tuple[int, ...]]]] = {s: [] for s in states}
    for s in states:
        if s not in inc:
            preds = tuple(sorted(t for t in p.graph.predecessors(s) if t in members))
            clauses[s].append((s, preds))
        if s not in exits and s not in goal:
            succs = tuple(sorted(t for t in p.graph.successors(s) if t in members))
            clauses[s].append((s, succs))
    watching: Dict[int, List[Tuple[int, Tuple[int, ...]]]] = {s: [] for s in states}
    for s in states:
        for clause in clauses[s]:
            for var in (clause[0],) + clause[1]:
                watching[var].append(clause)

    assignment: Dict[int, bool] = {}

    def violated(clause) -> bool:
        head, literals = clause
        if not assignment.get(head, False):
            return False
        return all(t in assignment and not assignment[t] for t in literals)

    def extend(i: int) -> Iterator[FrozenSet[int]]:
        if i == len(states):
            yield frozenset(s for s in states if assignment[s])
            return
        s = states[i]
        for value in (False, True):
            assignment[s] = value
            if not any(violated(c) for c in watching[s]):
                yield from extend(i + 1)
            del assignment[s]

    yield from extend(0)


def successor_points(table: BlockTable, p: DirectedTreePartition,
                     block: int) -> Iterator[Tuple[FrozenSet[int], Dict[int, Scalar]]]:
    """
    Every combination of one surviving partial subsystem per child.

    Yields the union of the chosen state sets and the concatenated values
    over out(B). A leaf yields a single empty combination.
    """
    children = p.children(block)
    for choice in product(*(table.survivors(c) for c in children)):
        states = frozenset().union(*(t.states for t in choice)) if choice else frozenset()
        values: Dict[int, Scalar] = {}
        for t in choice:
            values.update(t.values())
        yield states, values


def prune_partial(query: WitnessQuery, block: int, candidate: PartialSubsystem,
                  distances: Dict[int, int], upper_bound: Optional[int]) -> str:
    """
    Decide whether a candidate can still be part of a minimal witness.

    Returns:
        "keep", "value" (the interface values cannot reach the threshold
        although Goal lies below the block) or "distance" (the shortest path
        from the initial states plus |T| exceeds the upper bound)
    """
    arith = query.arith
    if query.prune in (PRUNE_VALUE, PRUNE_ALL):
        below = query.partition.cl(block)
        if query.model.goal <= below:
            total = sum(candidate.point, arith.zero)
            if arith.lt(total, arith.coerce(query.threshold)):
                return PRUNE_VALUE
    if query.prune in (PRUNE_DISTANCE, PRUNE_ALL) and upper_bound is not None:
        entered = [distances[q] for q in candidate.interface if q in candidate.states and q in distances]
        if entered and min(entered) + candidate.size > upper_bound:
            return PRUNE_DISTANCE
    return KEEP


def greedy_upper_bound(m: ProbabilisticModel, mode: str, threshold: Scalar,
                       arith: Arithmetic = EXACT, config: Optional[Config] = None) -> WitnessResult:
    """
    Witness found by deleting states one at a time while the threshold holds.

    Starts from the relevant states and tries them in ascending id order.
    The size of the result bounds the minimal witness size from above.
    """
    reach_mode = QUERY_MODES[mode][0]
    kept = set(relevant_states(m))
    value = subsystem_value(m, kept, reach_mode, arith, config)
    if arith.lt(value, arith.coerce(threshold)):
        return WitnessResult.infeasible(value)
    for s in sorted(kept):
        trial = kept - {s}
        trial_value = subsystem_value(m, trial, reach_mode, arith, config)
        if meets_threshold(trial_value, arith.coerce(threshold), arith):
            kept, value = trial, trial_value
    return WitnessResult(feasible=True, states=frozenset(kept), value=value)


def solve(query: WitnessQuery) -> WitnessResult:
    """
    Minimal witnessing subsystem for the query.

    Blocks are processed in reverse topological order. For each subset of a
    block passing the structural filter and each combination of child
    survivors, the interface values are computed on the block plus out(B)
    with the children's values assumed on out(B). Non-root blocks keep only
    non-dominated candidates, pruned after every subset batch; the root picks
    the smallest feasible candidate, ties broken by the lexicographically
    smallest state set.

    Args:
        query: Validated witness query

    Returns:
        WitnessResult, infeasible iff the full system misses the threshold

    Raises:
        ValidationError, PartitionError, CapExceededError: From validate_query
        ConvergenceError: Float-mode iteration cap
    """
    validate_query(query)
    config = resolve(query.config)
    arith = query.arith
    m = query.model.map_probabilities(arith.coerce)
    p = query.partition
    threshold = arith.coerce(query.threshold)
    start = time.perf_counter()
    stats: Counter = Counter()

    full_value = subsystem_value(m, m.states, query.reach_mode, arith, config)
    if arith.lt(full_value, threshold):
        logger.info("full system reaches %s < threshold", full_value)
        return WitnessResult.infeasible(full_value, {"full_value": str(full_value)})
    if arith.is_zero(full_value):
        # nothing reaches Goal, so only the empty set is left
        return WitnessResult(feasible=True, states=frozenset(), value=arith.zero,
                             stats={"latency_ms": 0})

    upper_bound = query.upper_bound
    if upper_bound is None and query.prune in (PRUNE_DISTANCE, PRUNE_ALL):
        upper_bound = greedy_upper_bound(m, query.mode, threshold, arith, config).size
    sources = m.initial_support()
    distances = nx.multi_source_dijkstra_path_length(p.graph.digraph, sources) if sources else {}

    table = BlockTable()
    best: Optional[Tuple[int, Tuple[int, ...], FrozenSet[int], Scalar]] = None
    peak_batch = 0

    for block in p.reverse_topological_order():
        interface = interface_of(query, block)
        out = tuple(sorted(p.out(block)))
        is_root = block == p.root
        survivors: List[PartialSubsystem] = []
        combos = list(successor_points(table, p, block))

        for subset in phi_models(p, block, m.goal, sources):
            stats["subsets_enumerated"] += 1
            batch: List[PartialSubsystem] = []
            for below, values in combos:
                stats["combinations"] += 1
                kept = subset | frozenset(out)
                f = InterfaceAssumption({q: values.get(q, arith.zero) for q in out})
                local = value_with_assumption(m, kept, f, query.reach_mode, arith, config)
                states = subset | below
                point = tuple(local[q] if q in subset else arith.zero for q in interface)
                candidate = PartialSubsystem(interface=interface, states=states, point=point)

                if is_root:
                    value = sum((m.initial.get(q, 0) * v for q, v in zip(interface, point)), arith.zero)
                    if meets_threshold(value, threshold, arith):
                        key = (candidate.size, candidate.sorted_states)
                        if best is None or key < best[:2]:
                            best = (candidate.size, candidate.sorted_states, states, value)
                    continue

                verdict = prune_partial(query, block, candidate, distances, upper_bound)
                if verdict != KEEP:
                    stats[f"pruned_{verdict}"] += 1
                    continue
                batch.append(candidate)

            if batch:
                survivors = remove_dominated(survivors + batch, query.domination, arith, config, stats)
                peak_batch = max(peak_batch, len(survivors))

        if not is_root:
            table.insert(block, survivors)
            logger.debug("block %d: %d survivors over interface %s", block, len(survivors), interface)

    stats_out = dict(stats)
    stats_out["survivors_per_block"] = table.counts()
    stats_out["batch_survivors_peak"] = peak_batch
    stats_out["upper_bound"] = upper_bound
    stats_out["latency_ms"] = int((time.perf_counter() - start) * 1000)

    if best is None:
        # unreachable for a valid query: the full system meets the threshold
        raise ValidationError("no feasible candidate at the root block")
    _, _, states, value = best
    logger.info("witness of size %d with value %s", len(states), value)
    return WitnessResult(feasible=True, states=states, value=value, stats=stats_out)
