"""
Reachability Engine

Computes reachability values for DTMCs and MDPs, including the M^f transform.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from config import Config, resolve
from engine.linalg import solve_exact, solve_float
from errors import ConvergenceError, ValidationError
from models.markov import DTMC, DTMC_ACTION, ProbabilisticModel, induce_subsystem
from models.scalar import EXACT, Arithmetic, Scalar

logger = logging.getLogger(__name__)

MODE_DTMC = "dtmc"
MODE_MAX = "max"
MODE_MIN = "min"
REACH_MODES = (MODE_DTMC, MODE_MAX, MODE_MIN)

ASSUMPTION_ACTION = "assume"

# float rounding allowed when deciding that an action loses no mass
_MASS_SLACK = 1e-12
# float round-off tolerated on assumed interface values
_VALUE_SLACK = 1e-9

ValueVector = Dict[int, Scalar]


@dataclass(frozen=True)
class InterfaceAssumption:
    """Partial function f assigning assumed reach values to interface states."""

    value: Dict[int, Scalar]

    def __post_init__(self):
        outside = sorted(q for q, v in self.value.items() if not -_VALUE_SLACK <= v <= 1 + _VALUE_SLACK)
        if outside:
            raise ValidationError(f"assumed values must lie in [0,1]: states {outside}")

    @property
    def domain(self) -> FrozenSet[int]:
        return frozenset(self.value)

    def scaled(self, factor: Scalar) -> 'InterfaceAssumption':
        return InterfaceAssumption({q: factor * v for q, v in self.value.items()})

    def plus(self, other: 'InterfaceAssumption') -> 'InterfaceAssumption':
        if self.domain != other.domain:
            raise ValidationError("assumptions must share a domain to be added")
        return InterfaceAssumption({q: v + other.value[q] for q, v in self.value.items()})


def apply_assumption(m: ProbabilisticModel, kept: Iterable[int],
                     f: InterfaceAssumption) -> ProbabilisticModel:
    """
    Construct M^f over a kept state set.

    Every state in dom(f) loses its outgoing edges and gets a single action
    moving to a goal target with probability f(s). The target is the smallest
    goal state of the subsystem outside dom(f), or a fresh synthetic state.

    Args:
        m: Base model
        kept: Subsystem states
        f: Interface assumption with dom(f) ⊆ kept

    Returns:
        Transformed model

    Raises:
        ValidationError: If dom(f) is not contained in kept
    """
    kept = frozenset(kept)
    outside = f.domain - kept
    if outside:
        raise ValidationError(f"assumption domain not contained in subsystem: {sorted(outside)}")

    sub = induce_subsystem(m, kept)
    goal_candidates = sorted(sub.goal - f.domain)
    states = list(sub.states)
    if goal_candidates:
        target = goal_candidates[0]
    else:
        target = max(list(m.states) + list(f.domain), default=-1) + 1
        states.append(target)

    action = DTMC_ACTION if m.kind == DTMC else ASSUMPTION_ACTION
    transitions = {s: acts for s, acts in sub.transitions.items() if s not in f.domain}
    for q, v in f.value.items():
        transitions[q] = {action: {target: v}}

    return ProbabilisticModel(
        kind=m.kind,
        states=tuple(states),
        transitions=transitions,
        initial=dict(sub.initial),
        goal=(sub.goal - f.domain) | {target},
        names=dict(sub.names),
    )


def reach_value(m: ProbabilisticModel, mode: str, arith: Arithmetic = EXACT,
                config: Optional[Config] = None) -> ValueVector:
    """
    Compute the (optimal) probability of reaching Goal from every state.

    Args:
        m: Valid model
        mode: "dtmc", "max" or "min"
        arith: Exact or float arithmetic
        config: Iteration caps and tolerances

    Returns:
        Map state -> value

    Raises:
        ValidationError: If mode is unknown or "dtmc" is used on an MDP
        ConvergenceError: If float iteration exceeds the iteration cap
    """
    if mode not in REACH_MODES:
        raise ValidationError(f"unknown reach mode '{mode}'")
    if mode == MODE_DTMC and m.kind != DTMC:
        raise ValidationError("mode dtmc requires a DTMC model")

    model = m.map_probabilities(arith.coerce)
    if model.kind == DTMC:
        rows = {s: model.distribution(s, DTMC_ACTION) for s in model.states if s not in model.goal}
        values = _solve_chain(rows, model.goal, arith)
    elif arith.exact:
        if mode == MODE_MIN:
            values = _policy_iteration_min(model, arith)
        else:
            values = _policy_iteration_max(model, arith)
    else:
        values = _interval_iteration(model, mode, arith, resolve(config))

    return {s: values.get(s, arith.zero) for s in model.states}


def value_with_assumption(m: ProbabilisticModel, kept: Iterable[int], f: InterfaceAssumption,
                          mode: str, arith: Arithmetic = EXACT,
                          config: Optional[Config] = None) -> ValueVector:
    """Values of the kept states in M^f (apply_assumption then reach_value)."""
    kept = frozenset(kept)
    transformed = apply_assumption(m, kept, f)
    values = reach_value(transformed, mode, arith, config)
    return {s: values[s] for s in transformed.states if s in kept}


def can_reach_goal(m: ProbabilisticModel) -> FrozenSet[int]:
    """Non-goal states with a positive-probability path to Goal."""
    graph = nx.DiGraph()
    graph.add_nodes_from(m.states)
    for s, acts in m.transitions.items():
        for dist in acts.values():
            graph.add_edges_from((s, t) for t, p in dist.items() if p > 0)
    result = set()
    for g in m.goal:
        if g in graph:
            result.update(nx.ancestors(graph, g))
    return frozenset(result - m.goal)


def min_positive_states(m: ProbabilisticModel) -> FrozenSet[int]:
    """Non-goal states reaching Goal with positive probability under every scheduler."""
    positive = set(m.goal)
    changed = True
    while changed:
        changed = False
        for s in m.states:
            if s in positive:
                continue
            acts = m.transitions.get(s, {})
            if acts and all(any(p > 0 and t in positive for t, p in dist.items()) for dist in acts.values()):
                positive.add(s)
                changed = True
    return frozenset(positive - m.goal)


def maximal_end_components(m: ProbabilisticModel,
                           states: Iterable[int]) -> List[Tuple[FrozenSet[int], Dict[int, FrozenSet[str]]]]:
    """
    Decompose the sub-MDP on `states` into maximal end components.

    An action stays inside a candidate set when it loses no mass and all its
    successors are in the set. Candidates are refined by SCC decomposition
    until stable.

    Returns:
        List of (component states, state -> staying actions)
    """
    pending = [frozenset(states)]
    components = []
    while pending:
        candidate = pending.pop()
        staying = {
            s: frozenset(a for a, dist in m.transitions.get(s, {}).items() if _stays_within(dist, candidate))
            for s in candidate
        }
        staying = {s: acts for s, acts in staying.items() if acts}
        graph = nx.DiGraph()
        graph.add_nodes_from(staying)
        for s, acts in staying.items():
            for a in acts:
                graph.add_edges_from((s, t) for t, p in m.transitions[s][a].items() if p > 0 and t in staying)
        sccs = [frozenset(c) for c in nx.strongly_connected_components(graph)]
        if len(sccs) == 1 and sccs[0] == candidate:
            components.append((candidate, staying))
            continue
        pending.extend(sccs)
    return sorted(components, key=lambda c: min(c[0]))


def _stays_within(dist: Dict[int, Scalar], states: FrozenSet[int]) -> bool:
    support = [t for t, p in dist.items() if p > 0]
    return bool(support) and all(t in states for t in support) and sum(dist.values()) >= 1 - _MASS_SLACK


def _solve_chain(rows: Dict[int, Dict[int, Scalar]], goal: FrozenSet[int],
                 arith: Arithmetic) -> ValueVector:
    """Reach probabilities of a DTMC given as rows; states that cannot reach goal get 0."""
    graph = nx.DiGraph()
    graph.add_nodes_from(rows)
    graph.add_nodes_from(goal)
    for s, row in rows.items():
        graph.add_edges_from((s, t) for t, p in row.items() if p > 0)
    reaching = set()
    for g in goal:
        reaching.update(nx.ancestors(graph, g))
    unknowns = sorted(s for s in reaching if s in rows and s not in goal)
    index = {s: i for i, s in enumerate(unknowns)}

    n = len(unknowns)
    if arith.exact:
        a = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
        b = np.array([Fraction(0)] * n, dtype=object)
    else:
        a = np.eye(n)
        b = np.zeros(n)
    for s in unknowns:
        i = index[s]
        for t, p in rows[s].items():
            if t in goal:
                b[i] += p
            elif t in index:
                a[i, index[t]] -= p

    solution = solve_exact(a, b) if arith.exact else solve_float(a, b)
    values = {s: arith.zero for s in rows}
    values.update({g: arith.one for g in goal})
    for s in unknowns:
        values[s] = solution[index[s]] if arith.exact else float(solution[index[s]])
    return values


def _q_value(dist: Dict[int, Scalar], values: ValueVector, arith: Arithmetic) -> Scalar:
    return sum((p * values.get(t, arith.zero) for t, p in dist.items()), arith.zero)


def _evaluate_policy(m: ProbabilisticModel, policy: Dict[int, str], arith: Arithmetic) -> ValueVector:
    rows = {s: m.transitions[s][a] for s, a in policy.items()}
    return _solve_chain(rows, m.goal, arith)


def _policy_iteration_max(m: ProbabilisticModel, arith: Arithmetic) -> ValueVector:
    reaching = can_reach_goal(m)

    # start from an attractor policy: every reaching state moves closer to Goal
    policy: Dict[int, str] = {}
    frontier = set(m.goal)
    while frontier:
        next_frontier = set()
        for s in sorted(reaching - set(policy)):
            for a in m.actions(s):
                if any(p > 0 and t in frontier for t, p in m.transitions[s][a].items()):
                    policy[s] = a
                    next_frontier.add(s)
                    break
        frontier = next_frontier

    rounds = 0
    while True:
        rounds += 1
        values = _evaluate_policy(m, policy, arith)
        changed = False
        for s in sorted(policy):
            current = _q_value(m.transitions[s][policy[s]], values, arith)
            best_action, best = policy[s], current
            for a in m.actions(s):
                q = _q_value(m.transitions[s][a], values, arith)
                if q > best:
                    best_action, best = a, q
            if best_action != policy[s]:
                policy[s] = best_action
                changed = True
        if not changed:
            logger.debug("max policy iteration converged after %d rounds", rounds)
            return values


def _policy_iteration_min(m: ProbabilisticModel, arith: Arithmetic) -> ValueVector:
    positive = min_positive_states(m)
    policy = {s: m.actions(s)[0] for s in positive}

    rounds = 0
    while True:
        rounds += 1
        values = _evaluate_policy(m, policy, arith)
        changed = False
        for s in sorted(policy):
            current = _q_value(m.transitions[s][policy[s]], values, arith)
            best_action, best = policy[s], current
            for a in m.actions(s):
                q = _q_value(m.transitions[s][a], values, arith)
                if q < best:
                    best_action, best = a, q
            if best_action != policy[s]:
                policy[s] = best_action
                changed = True
        if not changed:
            logger.debug("min policy iteration converged after %d rounds", rounds)
            return values


def _interval_iteration(m: ProbabilisticModel, mode: str, arith: Arithmetic,
                        config: Config) -> ValueVector:
    """Float interval value iteration; MEC deflation keeps max upper bounds sound."""
    optimum = max if mode == MODE_MAX else min
    unknown = sorted(can_reach_goal(m) if mode == MODE_MAX else min_positive_states(m))

    lower = {s: 0.0 for s in m.states}
    upper = {s: 0.0 for s in m.states}
    for g in m.goal:
        lower[g] = upper[g] = 1.0
    for s in unknown:
        upper[s] = 1.0

    components = maximal_end_components(m, unknown) if mode == MODE_MAX else []

    gap = 1.0 if unknown else 0.0
    for iteration in range(config.max_iterations):
        if gap < config.iteration_tolerance:
            break
        new_lower, new_upper = {}, {}
        for s in unknown:
            dists = [m.transitions[s][a] for a in m.actions(s)]
            new_lower[s] = optimum(_q_value(d, lower, arith) for d in dists)
            new_upper[s] = optimum(_q_value(d, upper, arith) for d in dists)
        lower.update(new_lower)
        upper.update(new_upper)
        for states, staying in components:
            exits = [
                _q_value(m.transitions[s][a], upper, arith)
                for s in states for a in m.actions(s) if a not in staying.get(s, ())
            ]
            bound = max(exits, default=0.0)
            for s in states:
                upper[s] = min(upper[s], bound)
        gap = max((upper[s] - lower[s] for s in unknown), default=0.0)
    else:
        if gap >= config.iteration_tolerance:
            raise ConvergenceError(config.max_iterations, gap)

    logger.debug("interval iteration finished with gap %.3e", gap)
    return {s: (lower[s] + upper[s]) / 2 for s in m.states}
