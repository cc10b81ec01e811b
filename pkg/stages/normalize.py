"""
Normalization Stage

Rescales a lifted nonnegative instance so every entry lies in the narrow
band [1/12 − ε, 1/12].
"""

import logging
from fractions import Fraction

from errors import ValidationError
from models.mcp import McpInstance, as_matrix, as_vector
from stages.lift import check_lift_structure

logger = logging.getLogger(__name__)


def normalization_epsilon(n: int) -> Fraction:
    """Band width ε = 1/(3·12^{n+3}·2^{n+2}) for an instance with n pairs."""
    return Fraction(1, 3 * 12 ** (n + 3) * 2 ** (n + 2))


def check_epsilon_bound(n: int, eps: Fraction) -> bool:
    """Whether 0 < 12ε < 1/3·(1/12 − ε)^{n+2}."""
    eps = Fraction(eps)
    return 0 < 12 * eps < Fraction(1, 3) * (Fraction(1, 12) - eps) ** (n + 2)


def normalize_equal_valued(inst: McpInstance) -> McpInstance:
    """
    Equivalent instance with all entries in [1/12 − ε, 1/12].

    The lifted matrices, initial and final vectors share the offset κ in
    their third basis coordinate. Removing it leaves the parts
    A = N − κ/3, I = ι′ − κ/3 and F = f′/3 − κ/3, which all take a fresh
    common offset κ″ = (max − min)/(12ε) − max before being scaled by
    s = 1/(12(max + κ″)). A selection's value v becomes
    s^{n+2}·(v − κ^{n+2} + (3κ″)^{n+2})/3, and the threshold follows the
    same map.

    Args:
        inst: Output of lift_to_nonnegative_3d

    Returns:
        Normalized McpInstance carrying epsilon

    Raises:
        ValidationError: If the lift structure is missing
    """
    problems = check_lift_structure(inst)
    if problems:
        raise ValidationError("normalization needs a lifted instance: " + "; ".join(problems))
    n = inst.n
    kappa = inst.kappa
    eps = normalization_epsilon(n)
    shift = kappa / 3

    matrices = [[[[x - shift for x in row] for row in m] for m in pair] for pair in inst.pairs]
    iota = [x - shift for x in inst.iota]
    final = [x / 3 - shift for x in inst.final]

    entries = [x for pair in matrices for m in pair for row in m for x in row] + iota + final
    high, low = max(entries), min(entries)
    if high == low:
        offset = 1 - high
    else:
        offset = (high - low) / (12 * eps) - high
    scale = 1 / (12 * (high + offset))

    def rescale(x):
        return scale * (x + offset)

    threshold = scale ** (n + 2) * (inst.threshold - kappa ** (n + 2) + (3 * offset) ** (n + 2)) / 3
    normalized = McpInstance(
        dimension=3,
        pairs=tuple(
            tuple(as_matrix([[rescale(x) for x in row] for row in m]) for m in pair)
            for pair in matrices
        ),
        iota=as_vector([rescale(x) for x in iota]),
        final=as_vector([rescale(x) for x in final]),
        threshold=threshold,
        epsilon=eps,
        source=inst.source,
    )
    logger.debug("normalized %d pairs into band of width %s", n, eps)
    return normalized
