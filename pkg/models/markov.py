"""
Markov Model

Defines substochastic DTMCs/MDPs, induced subsystems and the underlying graph.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from models.scalar import Scalar, format_decimal

DTMC = "dtmc"
MDP = "mdp"
MODEL_KINDS = (DTMC, MDP)

# Single action label used for DTMC rows
DTMC_ACTION = "tau"

Distribution = Dict[int, Scalar]
ActionMap = Dict[str, Distribution]


@dataclass(frozen=True)
class ProbabilisticModel:
    """
    A substochastic DTMC or MDP.

    `transitions[s][action][t]` is the probability of moving from s to t
    under action. DTMC rows use the single action DTMC_ACTION. Missing mass
    flows to an implicit fail state.
    """

    kind: str
    states: Tuple[int, ...]
    transitions: Dict[int, ActionMap]
    initial: Dict[int, Scalar]
    goal: FrozenSet[int]
    names: Dict[int, str] = field(default_factory=dict)

    @classmethod
    def dtmc(cls, rows: Dict[int, Distribution], initial: Dict[int, Scalar],
             goal: Iterable[int], states: Optional[Iterable[int]] = None,
             names: Optional[Dict[int, str]] = None) -> 'ProbabilisticModel':
        """
        Build a DTMC from plain successor rows.

        Args:
            rows: state -> successor -> probability
            initial: initial distribution
            goal: goal states
            states: state ids (default: every id mentioned anywhere)
            names: optional display names

        Returns:
            ProbabilisticModel of kind DTMC
        """
        transitions = {s: {DTMC_ACTION: dict(row)} for s, row in rows.items()}
        return cls._assemble(DTMC, transitions, initial, goal, states, names)

    @classmethod
    def mdp(cls, actions: Dict[int, ActionMap], initial: Dict[int, Scalar],
            goal: Iterable[int], states: Optional[Iterable[int]] = None,
            names: Optional[Dict[int, str]] = None) -> 'ProbabilisticModel':
        """Build an MDP from state -> action -> successor -> probability."""
        transitions = {s: {a: dict(d) for a, d in acts.items()} for s, acts in actions.items()}
        return cls._assemble(MDP, transitions, initial, goal, states, names)

    @classmethod
    def _assemble(cls, kind, transitions, initial, goal, states, names):
        goal = frozenset(goal)
        if states is None:
            mentioned = set(transitions) | set(initial) | goal
            for acts in transitions.values():
                for dist in acts.values():
                    mentioned.update(dist)
            states = mentioned
        return cls(
            kind=kind,
            states=tuple(sorted(states)),
            transitions=transitions,
            initial=dict(initial),
            goal=goal,
            names=dict(names or {}),
        )

    @property
    def is_dtmc(self) -> bool:
        return self.kind == DTMC

    def actions(self, state: int) -> List[str]:
        """Enabled actions of a state, sorted."""
        return sorted(self.transitions.get(state, {}))

    def distribution(self, state: int, action: str) -> Distribution:
        return self.transitions.get(state, {}).get(action, {})

    def post(self, state: int) -> FrozenSet[int]:
        """Positive-probability successors under any action."""
        return frozenset(
            t for dist in self.transitions.get(state, {}).values()
            for t, p in dist.items() if p > 0
        )

    def initial_support(self) -> FrozenSet[int]:
        return frozenset(s for s, p in self.initial.items() if p > 0)

    def label(self, state: int) -> str:
        return self.names.get(state, str(state))

    def map_probabilities(self, convert) -> 'ProbabilisticModel':
        """Copy of the model with every probability passed through convert."""
        return ProbabilisticModel(
            kind=self.kind,
            states=self.states,
            transitions={
                s: {a: {t: convert(p) for t, p in dist.items()} for a, dist in acts.items()}
                for s, acts in self.transitions.items()
            },
            initial={s: convert(p) for s, p in self.initial.items()},
            goal=self.goal,
            names=self.names,
        )


@dataclass(frozen=True)
class UnderlyingGraph:
    """Directed graph of positive-probability successor pairs, actions erased."""

    vertices: Tuple[int, ...]
    edges: FrozenSet[Tuple[int, int]]

    @cached_property
    def digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    def successors(self, vertex: int) -> FrozenSet[int]:
        return frozenset(self.digraph.successors(vertex))

    def predecessors(self, vertex: int) -> FrozenSet[int]:
        return frozenset(self.digraph.predecessors(vertex))

    def induced(self, kept: Iterable[int]) -> 'UnderlyingGraph':
        kept = set(kept)
        return UnderlyingGraph(
            vertices=tuple(v for v in self.vertices if v in kept),
            edges=frozenset((u, v) for u, v in self.edges if u in kept and v in kept),
        )

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[Tuple[int, int]]) -> 'UnderlyingGraph':
        return cls(vertices=tuple(sorted(set(vertices))), edges=frozenset(edges))


def validate_model(m: ProbabilisticModel) -> List[str]:
    """
    Check all model invariants.

    Args:
        m: Model to check

    Returns:
        List of violations, empty iff the model is valid
    """
    violations: List[str] = []
    known = set(m.states)

    if m.kind not in MODEL_KINDS:
        violations.append(f"unknown model kind '{m.kind}'")
    if len(known) != len(m.states):
        violations.append("duplicate state ids")

    for s, acts in m.transitions.items():
        if s not in known:
            violations.append(f"transition source {s} is not a state")
            continue
        if m.kind == DTMC and len(acts) > 1:
            violations.append(f"DTMC state {m.label(s)} has {len(acts)} actions")
        for action, dist in acts.items():
            where = m.label(s) if m.kind == DTMC else f"{m.label(s)} action {action}"
            total = 0
            for t, p in dist.items():
                if t not in known:
                    violations.append(f"unknown successor {t} at {where}")
                if p < 0 or p > 1:
                    violations.append(f"probability {format_decimal(p)} outside [0,1] at {where} -> {m.label(t)}")
                total += p
            if total > 1:
                violations.append(f"row sum {format_decimal(total)} > 1 at {where}")

    total_initial = 0
    for s, p in m.initial.items():
        if s not in known:
            violations.append(f"initial state {s} is not a state")
        if p < 0 or p > 1:
            violations.append(f"initial probability {format_decimal(p)} outside [0,1] at {m.label(s)}")
        total_initial += p
    if total_initial > 1:
        violations.append(f"initial distribution sums to {format_decimal(total_initial)} > 1")

    for g in sorted(m.goal):
        if g not in known:
            violations.append(f"goal state {g} is not a state")
        elif m.post(g):
            violations.append(f"goal state {m.label(g)} is not a trap")

    return violations


def induce_subsystem(m: ProbabilisticModel, kept: Iterable[int]) -> ProbabilisticModel:
    """
    Build the subsystem induced by a state set.

    Transitions and initial entries with an endpoint outside kept are dropped;
    the remaining mass deficit flows to the implicit fail state.

    Args:
        m: Base model
        kept: States to keep

    Returns:
        Induced model over the kept states

    Raises:
        ValidationError: If kept mentions an unknown state
    """
    from errors import ValidationError

    kept = frozenset(kept)
    unknown = kept - set(m.states)
    if unknown:
        raise ValidationError(f"unknown state ids in subsystem: {sorted(unknown)}")

    transitions = {
        s: {a: {t: p for t, p in dist.items() if t in kept} for a, dist in acts.items()}
        for s, acts in m.transitions.items() if s in kept
    }
    return ProbabilisticModel(
        kind=m.kind,
        states=tuple(s for s in m.states if s in kept),
        transitions=transitions,
        initial={s: p for s, p in m.initial.items() if s in kept},
        goal=m.goal & kept,
        names={s: n for s, n in m.names.items() if s in kept},
    )


def underlying_graph(m: ProbabilisticModel) -> UnderlyingGraph:
    """Graph with an edge (s, t) iff some action moves s to t with positive probability."""
    edges = {
        (s, t)
        for s, acts in m.transitions.items()
        for dist in acts.values()
        for t, p in dist.items() if p > 0
    }
    return UnderlyingGraph(vertices=tuple(m.states), edges=frozenset(edges))


def relevant_states(m: ProbabilisticModel) -> FrozenSet[int]:
    """States reachable from the initial support that can also reach Goal."""
    graph = underlying_graph(m).digraph
    forward = set()
    for s in m.initial_support():
        forward.add(s)
        forward.update(nx.descendants(graph, s))
    backward = set()
    for g in m.goal:
        backward.add(g)
        backward.update(nx.ancestors(graph, g))
    return frozenset(forward & backward)


def initial_value(m: ProbabilisticModel, values: Dict[int, Scalar]) -> Scalar:
    """Probability from the initial distribution: sum of ι(s)·values(s)."""
    zero = Fraction(0) if all(isinstance(p, Fraction) for p in m.initial.values()) else 0.0
    return sum((p * values.get(s, 0) for s, p in m.initial.items()), zero)
