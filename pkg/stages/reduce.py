"""
Partition Reduction Stage

Reduces the partition problem to a two-dimensional matrix-pair chain
instance built from near-rotations with exact rational entries.
"""

import logging
from fractions import Fraction
from typing import Sequence, Tuple

from errors import ValidationError
from models.mcp import McpInstance, as_matrix, as_vector

logger = logging.getLogger(__name__)

# rotation angles handled by rational_rotation stay within this bound
MAX_ANGLE = Fraction(3, 4)


def has_equal_split(values: Sequence[int]) -> bool:
    """Whether the multiset splits into two parts of equal sum (subset-sum table)."""
    total = sum(values)
    if total % 2:
        return False
    reachable = {0}
    for v in values:
        reachable |= {r + v for r in reachable}
    return total // 2 in reachable


def _atan_bounds(t: Fraction, width: Fraction) -> Tuple[Fraction, Fraction]:
    """Bracket of atan(t) for |t| ≤ 1/2 from alternating series partial sums."""
    partial = Fraction(0)
    power = t
    k = 0
    while True:
        term = power / (2 * k + 1)
        partial += term if k % 2 == 0 else -term
        next_term = abs(power * t * t) / (2 * k + 3)
        if next_term < width:
            return (partial - next_term, partial + next_term)
        power *= t * t
        k += 1


def rational_rotation(angle: Fraction, eps: Fraction) -> Tuple[Fraction, Fraction]:
    """
    Rational (cos, sin) of an angle within eps, exactly on the unit circle.

    Bisects t = tan(θ/2) with certified arctangent brackets, then returns
    ((1 − t²)/(1 + t²), 2t/(1 + t²)).

    Raises:
        ValueError: If |angle| > 3/4 or eps ≤ 0
    """
    angle, eps = Fraction(angle), Fraction(eps)
    if abs(angle) > MAX_ANGLE:
        raise ValueError(f"angle {angle} outside [-3/4, 3/4]")
    if eps <= 0:
        raise ValueError("eps must be positive")

    lo, hi = Fraction(-1), Fraction(1)
    while True:
        t = (lo + hi) / 2
        low, high = _atan_bounds(t, eps / 8)
        estimate = low + high  # 2·atan(t), bracket width below eps/4
        if abs(estimate - angle) < eps / 2:
            break
        if estimate < angle:
            lo = t
        else:
            hi = t
    denominator = 1 + t * t
    return (1 - t * t) / denominator, 2 * t / denominator


def reduce_from_partition(values: Sequence[int], source: str = "") -> McpInstance:
    """
    Two-dimensional instance accepting iff the multiset has an equal split.

    Each s_i becomes the pair (rotation by s_i·γ, rotation by −s_i·γ) with
    γ = 3/(4m), where m is the larger of the positive sum and the negated
    negative sum. With ι = f = (1/2, 1/2) a selection scores cos(φ)/2 for
    its accumulated angle φ. Every rotation is exact up to ε = 3/(16mn) in
    angle, and the threshold sits midway between the cosine lower bound for
    |φ| ≤ nε and the Taylor upper bound for |φ| ≥ γ/2.

    Args:
        values: Integer multiset S
        source: Provenance label

    Returns:
        Two-dimensional McpInstance

    Raises:
        ValidationError: If S is empty or m = 0
    """
    values = [int(v) for v in values]
    if not values:
        raise ValidationError("partition instance must be nonempty")
    positive = sum(v for v in values if v > 0)
    negative = -sum(v for v in values if v < 0)
    m = max(positive, negative)
    if m == 0:
        raise ValidationError("all-zero instance splits trivially; nothing to reduce")

    n = len(values)
    gamma = Fraction(3, 4 * m)
    eps = Fraction(3, 16 * m * n)

    pairs = []
    for v in values:
        c, s = rational_rotation(v * gamma, eps)
        forward = as_matrix([[c, s], [-s, c]])
        backward = as_matrix([[c, -s], [s, c]])
        pairs.append((forward, backward))

    drift = n * eps
    y = gamma / 2
    accept_floor = (1 - drift ** 2 / 2) / 2
    reject_ceiling = (1 - y ** 2 / 2 + y ** 4 / 24) / 2
    threshold = (accept_floor + reject_ceiling) / 2
    logger.debug("partition reduction: n=%d m=%d threshold=%s", n, m, threshold)

    half = Fraction(1, 2)
    return McpInstance(
        dimension=2,
        pairs=tuple(pairs),
        iota=as_vector([half, half]),
        final=as_vector([half, half]),
        threshold=threshold,
        source=source or "partition " + " ".join(str(v) for v in values),
    )
