"""
Hull Domination

Domination between partial subsystems and size-staged pruning of dominated
points over an incremental hull of their projections.
"""

import logging
from collections import Counter
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from config import Config, resolve
from errors import CapExceededError, ValidationError
from models.partial import PartialSubsystem
from models.scalar import EXACT, Arithmetic, Scalar

logger = logging.getLogger(__name__)

STANDARD = "standard"
STRONG = "strong"
DOMINATION_MODES = (STANDARD, STRONG)

Point = Tuple[Scalar, ...]


def _check_interface(dimension: int, config: Config) -> None:
    if dimension > config.interface_cap:
        raise CapExceededError("interface", config.interface_cap, dimension,
                               "refine the partition so every block has a smaller interface")


def projections(point: Sequence[Scalar], config: Optional[Config] = None) -> Set[Point]:
    """
    All coordinate-subset zeroings of a point, duplicates removed.

    Raises:
        CapExceededError: If the point has more coordinates than the interface cap
    """
    config = resolve(config)
    _check_interface(len(point), config)
    zero = type(point[0])(0) if point else 0
    result = set()
    for mask in product((False, True), repeat=len(point)):
        result.add(tuple(x if keep else zero for x, keep in zip(point, mask)))
    return result


def _cross(o: Point, a: Point, b: Point):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: Iterable[Point]) -> List[Point]:
    """Monotone chain hull in counter-clockwise order, collinear points dropped."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower: List[Point] = []
    for p in pts:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _inside_2d(hull: List[Point], p: Point, arith: Arithmetic) -> bool:
    if len(hull) == 1:
        return all(arith.eq(a, b) for a, b in zip(hull[0], p))
    if len(hull) == 2:
        a, b = hull
        within = all(arith.ge(x, min(u, v)) and arith.le(x, max(u, v)) for x, u, v in zip(p, a, b))
        return within and arith.is_zero(_cross(a, b, p))
    n = len(hull)
    return all(arith.ge(_cross(hull[i], hull[(i + 1) % n], p), arith.zero) for i in range(n))


def _lp_exact(generators: Sequence[Point], p: Point) -> bool:
    import z3

    weights = [z3.Real(f"w{j}") for j in range(len(generators))]
    solver = z3.Solver()
    for w in weights:
        solver.add(w >= 0)
    solver.add(z3.Sum(weights) <= 1)
    for i, target in enumerate(p):
        target = Fraction(target)
        terms = [w * z3.Q(Fraction(q[i]).numerator, Fraction(q[i]).denominator)
                 for w, q in zip(weights, generators) if q[i] != 0]
        bound = z3.Q(target.numerator, target.denominator)
        solver.add((z3.Sum(terms) if terms else z3.RealVal(0)) >= bound)
    return solver.check() == z3.sat


def _lp_float(generators: Sequence[Point], p: Point, tolerance: float) -> bool:
    import numpy as np
    from scipy.optimize import linprog

    q = np.array(generators, dtype=float)
    k = len(generators)
    a_ub = np.vstack([-q.T, np.ones((1, k))])
    b_ub = np.concatenate([-(np.array(p, dtype=float) - tolerance), [1.0]])
    result = linprog(np.zeros(k), A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * k, method="highs")
    return result.status == 0


def in_down_hull(p: Point, generators: Sequence[Point], arith: Arithmetic = EXACT,
                 stats: Optional[Counter] = None) -> bool:
    """
    Whether p lies in the convex hull of all projections of the generators.

    For nonnegative points this hull is the set of y ≥ 0 bounded above by a
    sub-convex combination of generators, so dimension ≥ 3 is decided as a
    linear feasibility problem (z3 over rationals, HiGHS in float mode).
    Dimension 1 and 2 use the explicit hull.
    """
    if not generators:
        return False
    if any(all(arith.ge(qi, pi) for qi, pi in zip(q, p)) for q in generators):
        return True
    if any(all(arith.gt(pi, qi) for qi in (q[i] for q in generators)) for i, pi in enumerate(p)):
        return False

    if stats is not None:
        stats["hull_calls"] += 1
    dimension = len(p)
    if dimension == 2:
        points = set()
        for q in generators:
            points |= {(q[0], q[1]), (q[0], q[1] * 0), (q[0] * 0, q[1])}
        points.add((arith.zero, arith.zero))
        return _inside_2d(convex_hull_2d(points), tuple(p), arith)
    if arith.exact:
        return _lp_exact(generators, p)
    return _lp_float(generators, p, arith.tolerance)


def _same_interface(subsystems: Iterable[PartialSubsystem], interface: Tuple[int, ...]) -> None:
    for s in subsystems:
        if s.interface != interface:
            raise ValidationError(f"interface mismatch: {s.interface} vs {interface}")


def dominates(others: Sequence[PartialSubsystem], t: PartialSubsystem,
              arith: Arithmetic = EXACT, config: Optional[Config] = None) -> bool:
    """
    Whether a set of partial subsystems dominates t.

    True iff val_I(t) lies in the hull of the projections of the points of
    the no-larger members of `others`.
    """
    config = resolve(config)
    _same_interface(others, t.interface)
    _check_interface(len(t.interface), config)
    generators = [s.point for s in others if s.size <= t.size and s.states != t.states]
    return _is_dominated(t.point, generators, STANDARD, arith)


def strongly_dominates(others: Sequence[PartialSubsystem], t: PartialSubsystem,
                       arith: Arithmetic = EXACT, config: Optional[Config] = None) -> bool:
    """Whether one no-larger member of `others` is pointwise ≥ t."""
    resolve(config)
    _same_interface(others, t.interface)
    generators = [s.point for s in others if s.size <= t.size and s.states != t.states]
    return _is_dominated(t.point, generators, STRONG, arith)


def _is_dominated(p: Point, generators: Sequence[Point], mode: str, arith: Arithmetic,
                  stats: Optional[Counter] = None) -> bool:
    if not generators:
        return False
    if all(arith.is_zero(x) for x in p):
        return True
    if mode == STRONG:
        return any(all(arith.ge(qi, pi) for qi, pi in zip(q, p)) for q in generators)
    return in_down_hull(p, generators, arith, stats)


class HullAccumulator:
    """
    Points accepted so far, kept as the vertices of the hull of their projections.

    Points are added in stages of non-decreasing size; a stage keeps exactly
    the candidates that are not dominated by earlier vertices together with
    the other candidates of the same stage.
    """

    def __init__(self, interface: Tuple[int, ...], mode: str = STANDARD,
                 arith: Arithmetic = EXACT, config: Optional[Config] = None,
                 stats: Optional[Counter] = None):
        if mode not in DOMINATION_MODES:
            raise ValidationError(f"unknown domination mode '{mode}'")
        self.config = resolve(config)
        _check_interface(len(interface), self.config)
        self.interface = interface
        self.mode = mode
        self.arith = arith
        self.stats = stats if stats is not None else Counter()
        self.vertices: List[PartialSubsystem] = []
        self._last_size = -1

    @property
    def dimension(self) -> int:
        return len(self.interface)

    def _same_point(self, a: Point, b: Point) -> bool:
        return all(self.arith.eq(x, y) for x, y in zip(a, b))

    def add_stage(self, candidates: Sequence[PartialSubsystem]) -> List[PartialSubsystem]:
        """
        Add one size stage and return the candidates kept as vertices.

        Raises:
            ValidationError: If the stage is smaller than a previous one or
                mixes sizes
        """
        if not candidates:
            return []
        size = candidates[0].size
        if any(c.size != size for c in candidates) or size < self._last_size:
            raise ValidationError("hull stages must be added in non-decreasing single sizes")
        _same_interface(candidates, self.interface)
        self._last_size = size

        # equal points (up to tolerance) at one size: keep the smallest state set
        stage: List[PartialSubsystem] = []
        for c in sorted(candidates, key=lambda c: c.sorted_states):
            if not any(self._same_point(c.point, s.point) for s in stage):
                stage.append(c)
        self.stats["duplicates_removed"] += len(candidates) - len(stage)

        # a dropped candidate is no longer a generator, so of two points
        # dominating each other within tolerance the later one survives
        previous = [v.point for v in self.vertices]
        kept: List[PartialSubsystem] = []
        for i, c in enumerate(stage):
            generators = previous + [k.point for k in kept] + [o.point for o in stage[i + 1:]]
            if _is_dominated(c.point, generators, self.mode, self.arith, self.stats):
                self.stats["dominated_removed"] += 1
            else:
                kept.append(c)
        self.vertices.extend(kept)
        return kept

    def contains(self, point: Point) -> bool:
        """Whether a point is dominated by the accepted vertices."""
        return _is_dominated(point, [v.point for v in self.vertices], self.mode, self.arith, self.stats)


def remove_dominated(subsystems: Sequence[PartialSubsystem], mode: str = STANDARD,
                     arith: Arithmetic = EXACT, config: Optional[Config] = None,
                     stats: Optional[Counter] = None) -> List[PartialSubsystem]:
    """
    Drop every partial subsystem dominated by the others.

    Candidates are processed size-ascending; the result is sorted by
    (size, state set).

    Args:
        subsystems: Candidates over one common interface
        mode: "standard" (hull) or "strong" (pointwise)
        arith: Number mode
        config: Supplies interface_cap
        stats: Optional counter receiving hull_calls / dominated_removed

    Returns:
        Non-dominated subsystems

    Raises:
        CapExceededError: If the interface exceeds the cap
        ValidationError: On interface mismatch
    """
    if not subsystems:
        return []
    accumulator = HullAccumulator(subsystems[0].interface, mode, arith, config, stats)
    stages: Dict[int, List[PartialSubsystem]] = {}
    for s in subsystems:
        stages.setdefault(s.size, []).append(s)
    for size in sorted(stages):
        accumulator.add_stage(stages[size])
    logger.debug("remove_dominated(%s): %d -> %d", mode, len(subsystems), len(accumulator.vertices))
    return sorted(accumulator.vertices, key=PartialSubsystem.sort_key)
