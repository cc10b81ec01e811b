"""
Instance Generators

Seeded random models with a known directed tree partition.
"""

import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from errors import ValidationError
from models.markov import DTMC, MDP, ProbabilisticModel

Blocks = List[List[int]]


def _split_mass(rng: random.Random, targets: Sequence[int], denominator: int = 10) -> Dict[int, Fraction]:
    """Random rational distribution over targets with total mass in [7/10, 1]."""
    total = rng.randint(7, denominator)
    weights = [rng.randint(1, 4) for _ in targets]
    scale = sum(weights)
    dist: Dict[int, Fraction] = {}
    for t, w in zip(targets, weights):
        dist[t] = dist.get(t, Fraction(0)) + Fraction(total * w, denominator * scale)
    return dist


def _rows(rng: random.Random, kind: str, targets: Sequence[int]) -> Dict[str, Dict[int, Fraction]]:
    if kind == DTMC:
        return {"tau": _split_mass(rng, targets)}
    actions = {}
    for a in range(rng.randint(1, 2)):
        chosen = rng.sample(list(targets), rng.randint(1, len(targets)))
        actions[f"a{a}"] = _split_mass(rng, chosen)
    return actions


def _assemble(kind: str, transitions, initial, goal, states) -> ProbabilisticModel:
    if kind == DTMC:
        rows = {s: acts["tau"] for s, acts in transitions.items()}
        return ProbabilisticModel.dtmc(rows, initial, goal, states=states)
    return ProbabilisticModel.mdp(transitions, initial, goal, states=states)


def generate_layered_model(layers: int, width: int, kind: str = DTMC,
                           seed: Optional[int] = None) -> Tuple[ProbabilisticModel, Blocks]:
    """
    Random layered model whose layer partition is a directed path.

    Layer i holds `width` states; every state moves to one to three states
    of the next layer and sometimes to its right neighbour in the same
    layer. The last layer moves to a single goal state. The initial state is
    the first state of layer 0.

    Returns:
        (model, blocks) with one block per layer plus the goal block
    """
    if layers < 1 or width < 1:
        raise ValidationError("layers and width must be positive")
    if kind not in (DTMC, MDP):
        raise ValidationError(f"unknown model kind '{kind}'")
    rng = random.Random(seed)
    blocks: Blocks = [[i * width + k for k in range(width)] for i in range(layers)]
    goal = layers * width
    transitions = {}
    for i, layer in enumerate(blocks):
        for k, s in enumerate(layer):
            if i + 1 < layers:
                targets = rng.sample(blocks[i + 1], min(width, rng.randint(1, 3)))
            else:
                targets = [goal]
            if k + 1 < width and rng.random() < 0.3:
                targets = list(targets) + [layer[k + 1]]
            transitions[s] = _rows(rng, kind, targets)
    states = list(range(goal + 1))
    model = _assemble(kind, transitions, {0: Fraction(1)}, [goal], states)
    return model, blocks + [[goal]]


def random_tree_partition_model(n: int, seed: Optional[int] = None,
                                kind: str = DTMC) -> Tuple[ProbabilisticModel, Blocks]:
    """
    Random model of about n states built around a random block tree.

    Blocks have one to three states with arbitrary edges inside a block
    (cycles included); every child block is entered from its parent and
    leaf blocks are single goal states with probability one half.

    Returns:
        (model, blocks) where blocks form a valid directed tree partition
    """
    if n < 2:
        raise ValidationError("need at least two states")
    rng = random.Random(seed)
    blocks: Blocks = []
    parents: List[Optional[int]] = []
    next_id = 0
    while next_id < n:
        size = min(rng.randint(1, 3), n - next_id)
        blocks.append(list(range(next_id, next_id + size)))
        parents.append(rng.randrange(len(blocks) - 1) if len(blocks) > 1 else None)
        next_id += size

    children: Dict[int, List[int]] = {b: [] for b in range(len(blocks))}
    for b, p in enumerate(parents):
        if p is not None:
            children[p].append(b)

    goal = set()
    for b, block in enumerate(blocks):
        if not children[b] and b != 0 and len(block) == 1 and rng.random() < 0.5:
            goal.add(block[0])
    if not goal:
        # append a goal leaf below the last block
        blocks.append([next_id])
        parents.append(len(blocks) - 2)
        children[len(blocks) - 2].append(len(blocks) - 1)
        children[len(blocks) - 1] = []
        goal.add(next_id)
        next_id += 1

    transitions = {}
    for b, block in enumerate(blocks):
        for s in block:
            if s in goal:
                continue
            targets = [t for t in block if t != s and rng.random() < 0.5]
            for c in children[b]:
                targets.extend(t for t in blocks[c] if rng.random() < 0.5)
            if not targets:
                targets = [t for t in block if t != s] or [s]
            transitions[s] = _rows(rng, kind, targets)
        # every child must be entered from this block
        for c in children[b]:
            entered = any(t in blocks[c] for s in block if s not in goal
                          for dist in transitions.get(s, {}).values() for t in dist)
            if not entered:
                source = next(s for s in block if s not in goal)
                for dist in transitions[source].values():
                    share = Fraction(1, 10)
                    for t in dist:
                        dist[t] *= Fraction(9, 10)
                    dist[blocks[c][0]] = dist.get(blocks[c][0], Fraction(0)) + share

    initial = {blocks[0][0]: Fraction(1)}
    model = _assemble(kind, transitions, initial, goal, list(range(next_id)))
    return model, blocks
