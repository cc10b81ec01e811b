"""
MCP Search

Exact evaluation and exhaustive decision of matrix-pair chain instances.
"""

import logging
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Config, resolve
from engine.linalg import chain_product, fraction_vector
from errors import CapExceededError, ValidationError
from models.mcp import McpInstance

logger = logging.getLogger(__name__)

Selection = Tuple[int, ...]


def parse_selection(sigma) -> Selection:
    """Accept "0110", a sequence of 0/1 ints or booleans."""
    bits = tuple(int(b) for b in (sigma if not isinstance(sigma, str) else sigma.strip()))
    if any(b not in (0, 1) for b in bits):
        raise ValidationError(f"selection must be a bit string, got {sigma!r}")
    return bits


def evaluate(inst: McpInstance, sigma) -> Fraction:
    """
    Exact value iota · M^1_σ1 ⋯ M^n_σn · final.

    Raises:
        ValidationError: If the selection length differs from n
    """
    bits = parse_selection(sigma)
    if len(bits) != inst.n:
        raise ValidationError(f"selection has {len(bits)} bits for {inst.n} pairs")
    chain = chain_product([inst.matrix(j, bit) for j, bit in enumerate(bits)], inst.dimension)
    return Fraction(fraction_vector(inst.iota).dot(chain).dot(fraction_vector(inst.final)))


def brute_force(inst: McpInstance, config: Optional[Config] = None) -> Tuple[bool, Selection, Fraction]:
    """
    Exhaustive maximum over all 2^n selections.

    Prefix products are shared across selections by a depth-first walk; the
    lexicographically smallest maximising selection wins ties.

    Returns:
        (accepted, best selection, best value)

    Raises:
        CapExceededError: If n exceeds mcp_brute_cap
    """
    config = resolve(config)
    if inst.n > config.mcp_brute_cap:
        raise CapExceededError("mcp_brute", config.mcp_brute_cap, inst.n)
    final = np.array(inst.final, dtype=object)
    matrices = [(inst.matrix(j, 0), inst.matrix(j, 1)) for j in range(inst.n)]
    best: List = [None, None]
    bits: List[int] = []

    def walk(j: int, row: np.ndarray) -> None:
        if j == inst.n:
            value = Fraction(row.dot(final))
            if best[0] is None or value > best[0]:
                best[0], best[1] = value, tuple(bits)
            return
        for bit in (0, 1):
            bits.append(bit)
            walk(j + 1, row.dot(matrices[j][bit]))
            bits.pop()

    walk(0, np.array(inst.iota, dtype=object))
    value, sigma = best
    logger.debug("mcp brute force over %d pairs: best %s", inst.n, value)
    return value >= inst.threshold, sigma, value


def split_half_maximum(inst: McpInstance) -> Fraction:
    """
    Maximum value by combining all prefix rows with all suffix columns.

    An independent re-evaluation of brute_force for cross-checking.
    """
    half = inst.n // 2
    prefixes = []
    for bits in product((0, 1), repeat=half):
        row = np.array(inst.iota, dtype=object)
        for j, bit in enumerate(bits):
            row = row.dot(inst.matrix(j, bit))
        prefixes.append(row)
    suffixes = []
    for bits in product((0, 1), repeat=inst.n - half):
        column = np.array(inst.final, dtype=object)
        for j, bit in reversed(list(enumerate(bits, start=half))):
            column = inst.matrix(j, bit).dot(column)
        suffixes.append(column)
    return max(Fraction(row.dot(column)) for row in prefixes for column in suffixes)


def selections(n: int) -> Sequence[Selection]:
    """All selections of length n in lexicographic order."""
    return list(product((0, 1), repeat=n))
