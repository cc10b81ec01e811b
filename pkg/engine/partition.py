"""
Partition Engine

Directed tree/path partitions: validation, navigation, width and search.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from config import Config, resolve
from errors import CapExceededError, PartitionError, PartitionViolation
from models.markov import UnderlyingGraph

logger = logging.getLogger(__name__)

SHAPE_TREE = "tree"
SHAPE_PATH = "path"
SHAPES = (SHAPE_TREE, SHAPE_PATH)


@dataclass(frozen=True)
class DirectedTreePartition:
    """
    A block list whose quotient graph is a directed tree.

    Blocks are identified by their index. `parents[b]` is None only for the
    root. Navigation sets follow the bottom-up witness algorithm: inc(B) are
    the states entered from the parent block or initial, out(B) the inc sets
    of the children, exit(B) the states with a successor outside B.
    """

    blocks: Tuple[FrozenSet[int], ...]
    parents: Tuple[Optional[int], ...]
    root: Optional[int]
    graph: UnderlyingGraph
    initial: FrozenSet[int] = field(default_factory=frozenset)

    @cached_property
    def _children(self) -> Dict[int, Tuple[int, ...]]:
        children: Dict[int, List[int]] = {b: [] for b in range(len(self.blocks))}
        for b, p in enumerate(self.parents):
            if p is not None:
                children[p].append(b)
        return {b: tuple(sorted(c)) for b, c in children.items()}

    @cached_property
    def _block_index(self) -> Dict[int, int]:
        return {s: b for b, block in enumerate(self.blocks) for s in block}

    @property
    def width(self) -> int:
        return max((len(b) for b in self.blocks), default=0)

    @property
    def shape(self) -> str:
        return SHAPE_PATH if all(len(c) <= 1 for c in self._children.values()) else SHAPE_TREE

    def parent(self, b: int) -> Optional[int]:
        return self.parents[b]

    def children(self, b: int) -> Tuple[int, ...]:
        return self._children[b]

    def block_of(self, state: int) -> int:
        return self._block_index[state]

    def inc(self, b: int) -> FrozenSet[int]:
        """States of block b with an edge from the parent block, or initial."""
        parent = self.parents[b]
        entered = set(s for s in self.blocks[b] if s in self.initial)
        if parent is not None:
            for s in self.blocks[b]:
                if any(self._block_index[p] == parent for p in self.graph.predecessors(s)):
                    entered.add(s)
        return frozenset(entered)

    def out(self, b: int) -> FrozenSet[int]:
        """Union of inc(C) over the children C of b."""
        result: Set[int] = set()
        for c in self.children(b):
            result |= self.inc(c)
        return frozenset(result)

    def exit(self, b: int) -> FrozenSet[int]:
        """States of block b with some successor outside b."""
        block = self.blocks[b]
        return frozenset(s for s in block if any(t not in block for t in self.graph.successors(s)))

    def cl(self, b: int) -> FrozenSet[int]:
        """Union of the blocks in the subtree rooted at b."""
        result: Set[int] = set()
        stack = [b]
        while stack:
            current = stack.pop()
            result |= self.blocks[current]
            stack.extend(self.children(current))
        return frozenset(result)

    def topological_order(self) -> List[int]:
        """Blocks with every parent before its children."""
        if self.root is None:
            return []
        order, queue = [], [self.root]
        while queue:
            b = queue.pop(0)
            order.append(b)
            queue.extend(self.children(b))
        return order

    def reverse_topological_order(self) -> List[int]:
        return list(reversed(self.topological_order()))


def width(p: DirectedTreePartition) -> int:
    """Maximal block cardinality."""
    return p.width


def quotient_graph(g: UnderlyingGraph, assignment: Dict[int, int]) -> nx.DiGraph:
    """Graph on block ids with an edge whenever a model edge crosses blocks."""
    quotient = nx.DiGraph()
    quotient.add_nodes_from(set(assignment.values()))
    for u, v in g.edges:
        bu, bv = assignment[u], assignment[v]
        if bu != bv:
            quotient.add_edge(bu, bv)
    return quotient


def _quotient_violation(quotient: nx.DiGraph, shape: str) -> Optional[PartitionViolation]:
    for u, v in quotient.edges:
        if quotient.has_edge(v, u):
            return PartitionViolation.QUOTIENT_TWO_CYCLE
    if any(d > 1 for _, d in quotient.in_degree()):
        return PartitionViolation.IN_DEGREE
    if not nx.is_directed_acyclic_graph(quotient):
        return PartitionViolation.QUOTIENT_CYCLE
    roots = [b for b, d in quotient.in_degree() if d == 0]
    if len(roots) != 1:
        return PartitionViolation.MULTIPLE_ROOTS
    if shape == SHAPE_PATH and any(d > 1 for _, d in quotient.out_degree()):
        return PartitionViolation.NOT_PATH
    return None


def validate_partition(g: UnderlyingGraph, blocks: Sequence[Iterable[int]],
                       initial: Iterable[int] = (), shape: str = SHAPE_TREE) -> DirectedTreePartition:
    """
    Validate a block list as a directed tree (or path) partition.

    Args:
        g: Underlying graph
        blocks: Block state sets, identified by position
        initial: Initial states (used for inc of the root block)
        shape: "tree" or "path"

    Returns:
        Navigable DirectedTreePartition

    Raises:
        PartitionError: Naming the first violated condition
    """
    blocks = tuple(frozenset(b) for b in blocks)
    vertices = set(g.vertices)

    if not blocks:
        raise PartitionError(PartitionViolation.EMPTY_BLOCK, "partition has no blocks")
    seen: Dict[int, int] = {}
    for b, block in enumerate(blocks):
        if not block:
            raise PartitionError(PartitionViolation.EMPTY_BLOCK, f"block {b}")
        unknown = block - vertices
        if unknown:
            raise PartitionError(PartitionViolation.UNKNOWN_STATE, f"{sorted(unknown)} in block {b}")
        for s in block:
            if s in seen:
                raise PartitionError(PartitionViolation.DISJOINTNESS,
                                     f"state {s} in blocks {seen[s]} and {b}")
            seen[s] = b
    missing = vertices - set(seen)
    if missing:
        raise PartitionError(PartitionViolation.COVERAGE, f"states {sorted(missing)} in no block")

    quotient = quotient_graph(g, seen)
    violation = _quotient_violation(quotient, shape)
    if violation is not None:
        raise PartitionError(violation)

    parents: List[Optional[int]] = [None] * len(blocks)
    for u, v in quotient.edges:
        parents[v] = u
    root = next(b for b in range(len(blocks)) if parents[b] is None)
    return DirectedTreePartition(
        blocks=blocks,
        parents=tuple(parents),
        root=root,
        graph=g,
        initial=frozenset(initial),
    )


def check_goal_blocks(p: DirectedTreePartition, goal: Iterable[int]) -> None:
    """Raise PartitionError unless every block is inside Goal or disjoint from it."""
    goal = frozenset(goal)
    for b, block in enumerate(p.blocks):
        if block & goal and not block <= goal:
            raise PartitionError(PartitionViolation.GOAL_SPLIT, f"block {b} mixes goal and non-goal states")


def split_goal_blocks(g: UnderlyingGraph, p: DirectedTreePartition,
                      goal: Iterable[int]) -> DirectedTreePartition:
    """
    Move the goal states of mixed blocks into blocks of their own.

    Raises:
        PartitionError: goal_split when the split breaks the tree property
    """
    goal = frozenset(goal)
    blocks: List[FrozenSet[int]] = []
    changed = False
    for block in p.blocks:
        if block & goal and not block <= goal:
            blocks.append(block - goal)
            blocks.append(block & goal)
            changed = True
        else:
            blocks.append(block)
    if not changed:
        return p
    try:
        return validate_partition(g, blocks, p.initial, SHAPE_TREE)
    except PartitionError as exc:
        raise PartitionError(PartitionViolation.GOAL_SPLIT,
                             f"splitting goal states breaks the tree ({exc.reason.value})")


def merge_root_blocks(g: UnderlyingGraph, blocks: Sequence[Iterable[int]],
                      initial: Iterable[int] = ()) -> Tuple[DirectedTreePartition, int]:
    """
    Merge every quotient root (and every block holding an initial state) into one block.

    Returns:
        (validated partition, width increase over the input blocks)
    """
    blocks = [frozenset(b) for b in blocks]
    initial = frozenset(initial)
    assignment = {s: b for b, block in enumerate(blocks) for s in block}
    quotient = quotient_graph(g, assignment)
    roots = {b for b in range(len(blocks)) if quotient.in_degree(b) == 0}
    roots |= {assignment[s] for s in initial if s in assignment}

    merged = frozenset().union(*(blocks[b] for b in roots)) if roots else frozenset()
    rest = [block for b, block in enumerate(blocks) if b not in roots]
    new_blocks = ([merged] if merged else []) + rest
    partition = validate_partition(g, new_blocks, initial)
    old_width = max((len(b) for b in blocks), default=0)
    return partition, partition.width - old_width


def _condensed_units(g: UnderlyingGraph) -> Tuple[List[FrozenSet[int]], List[Tuple[int, int]]]:
    """SCCs ordered by smallest member, plus the edges between them."""
    condensed = nx.condensation(g.digraph)
    members = {c: frozenset(condensed.nodes[c]['members']) for c in condensed.nodes}
    order = sorted(members, key=lambda c: min(members[c]))
    position = {c: i for i, c in enumerate(order)}
    units = [members[c] for c in order]
    edges = [(position[u], position[v]) for u, v in condensed.edges]
    return units, edges


def _restricted_growth_strings(weights: Sequence[int], bound) -> Iterator[List[int]]:
    """
    Yield restricted growth strings in lexicographic order.

    `bound(weight, labels)` is consulted for every block weight increase and
    prunes the branch when it returns False.
    """
    n = len(weights)
    labels: List[int] = []
    block_weights: List[int] = []

    def extend(i: int) -> Iterator[List[int]]:
        if i == n:
            yield list(labels)
            return
        for label in range(len(block_weights) + 1):
            if label == len(block_weights):
                block_weights.append(0)
            block_weights[label] += weights[i]
            if bound(block_weights[label]):
                labels.append(label)
                yield from extend(i + 1)
                labels.pop()
            block_weights[label] -= weights[i]
            if block_weights[label] == 0:
                block_weights.pop()

    yield from extend(0)


def exact_width(g: UnderlyingGraph, shape: str = SHAPE_TREE,
                config: Optional[Config] = None) -> Tuple[int, Optional[DirectedTreePartition]]:
    """
    Minimum width over all directed tree (or path) partitions.

    Strongly connected components are contracted first since every valid
    partition keeps them inside one block. Set partitions of the components
    are enumerated as restricted growth strings with a branch-and-bound on
    block weight; among optimal partitions the lexicographically smallest
    string wins.

    Args:
        g: Underlying graph
        shape: "tree" or "path"
        config: Supplies exact_width_cap

    Returns:
        (width, witness partition); an empty graph has width 0 and no partition

    Raises:
        CapExceededError: If the graph has more vertices than the cap
    """
    config = resolve(config)
    n = len(g.vertices)
    if n > config.exact_width_cap:
        raise CapExceededError("exact_width", config.exact_width_cap, n,
                               "use heuristic_layer_partition for larger graphs")
    if n == 0:
        return 0, None

    units, unit_edges = _condensed_units(g)
    weights = [len(u) for u in units]

    heuristic = heuristic_layer_partition(g, shape=shape)
    best = {'width': heuristic.width, 'labels': None}

    def bound(weight: int) -> bool:
        if best['labels'] is None:
            return weight <= best['width']
        return weight < best['width']

    for labels in _restricted_growth_strings(weights, bound):
        quotient = nx.DiGraph()
        quotient.add_nodes_from(set(labels))
        quotient.add_edges_from((labels[u], labels[v]) for u, v in unit_edges if labels[u] != labels[v])
        if _quotient_violation(quotient, shape) is not None:
            continue
        block_weights: Dict[int, int] = {}
        for i, label in enumerate(labels):
            block_weights[label] = block_weights.get(label, 0) + weights[i]
        candidate = max(block_weights.values())
        if candidate < best['width'] or best['labels'] is None:
            best['width'], best['labels'] = candidate, labels

    labels = best['labels']
    blocks: Dict[int, Set[int]] = {}
    for i, label in enumerate(labels):
        blocks.setdefault(label, set()).update(units[i])
    partition = validate_partition(g, [blocks[k] for k in sorted(blocks)], shape=shape)
    logger.debug("exact %s width %d over %d components", shape, partition.width, len(units))
    return partition.width, partition


def enumerate_partition_widths(g: UnderlyingGraph, shape: str = SHAPE_TREE) -> int:
    """Minimum width by plain enumeration of every set partition of the vertices."""
    vertices = list(g.vertices)
    if not vertices:
        return 0
    best = len(vertices)
    for labels in _restricted_growth_strings([1] * len(vertices), lambda w: True):
        assignment = {v: labels[i] for i, v in enumerate(vertices)}
        if _quotient_violation(quotient_graph(g, assignment), shape) is None:
            counts: Dict[int, int] = {}
            for label in labels:
                counts[label] = counts.get(label, 0) + 1
            best = min(best, max(counts.values()))
    return best


def bisection_gadget(g: UnderlyingGraph) -> UnderlyingGraph:
    """Add a fresh source i and sink e with edges i→v and v→e for every vertex v."""
    top = max(g.vertices, default=-1)
    source, sink = top + 1, top + 2
    edges = set(g.edges)
    for v in g.vertices:
        edges.add((source, v))
        edges.add((v, sink))
    return UnderlyingGraph(vertices=tuple(g.vertices) + (source, sink), edges=frozenset(edges))


def has_oneway_bisection(g: UnderlyingGraph) -> bool:
    """Whether V splits into equal halves with no edge from the second half to the first."""
    vertices = list(g.vertices)
    if len(vertices) % 2:
        return False
    half = len(vertices) // 2
    for first in combinations(vertices, half):
        first = set(first)
        if not any(u not in first and v in first for u, v in g.edges):
            return True
    return False


def heuristic_layer_partition(g: UnderlyingGraph, initial: Iterable[int] = (),
                              shape: str = SHAPE_TREE) -> DirectedTreePartition:
    """
    Level partition of the SCC condensation.

    Components are grouped by longest-path level from the sources; levels
    holding initial states are merged into the root. Adjacent levels are
    merged (smallest combined size first) until the quotient is valid; the
    single-block partition is the final fallback.
    """
    initial = frozenset(initial)
    if not g.vertices:
        raise PartitionError(PartitionViolation.EMPTY_BLOCK, "graph has no vertices")

    condensed = nx.condensation(g.digraph)
    level: Dict[int, int] = {}
    for c in nx.topological_sort(condensed):
        preds = list(condensed.predecessors(c))
        level[c] = max((level[p] + 1 for p in preds), default=0)

    layers: Dict[int, Set[int]] = {}
    for c, lv in level.items():
        layers.setdefault(lv, set()).update(condensed.nodes[c]['members'])
    groups = [frozenset(layers[lv]) for lv in sorted(layers)]

    initial_levels = [i for i, grp in enumerate(groups) if grp & initial]
    if initial_levels:
        last = max(initial_levels)
        groups = [frozenset().union(*groups[:last + 1])] + groups[last + 1:]

    while True:
        try:
            return validate_partition(g, groups, initial, shape)
        except PartitionError:
            if len(groups) == 1:
                raise
            sizes = [len(groups[i]) + len(groups[i + 1]) for i in range(len(groups) - 1)]
            i = sizes.index(min(sizes))
            groups = groups[:i] + [groups[i] | groups[i + 1]] + groups[i + 2:]
