"""
Nonnegative Lift Stage

Lifts a two-dimensional instance to an equivalent nonnegative
three-dimensional one by a fixed change of basis.
"""

import logging
from fractions import Fraction
from typing import List, Optional

import numpy as np

from engine.linalg import fraction_matrix, fraction_vector, inverse_exact
from errors import ValidationError
from models.mcp import McpInstance, as_matrix, as_vector

logger = logging.getLogger(__name__)

BASIS = fraction_matrix([[1, 1, 1], [-1, 1, 1], [0, -2, 1]])
BASIS_INVERSE = inverse_exact(BASIS)


def _embed(matrix, corner: Fraction) -> np.ndarray:
    """diag(matrix, corner) as a 3x3 object array."""
    block = fraction_matrix([[0, 0, 0]] * 3)
    block[:2, :2] = np.array(matrix, dtype=object)
    block[2, 2] = Fraction(corner)
    return block


def _conjugate(matrix, kappa: Fraction) -> np.ndarray:
    return BASIS.dot(_embed(matrix, kappa)).dot(BASIS_INVERSE)


def _lift_vectors(inst: McpInstance, kappa: Fraction):
    iota = fraction_vector(list(inst.iota) + [kappa]).dot(BASIS_INVERSE)
    final = BASIS.dot(fraction_vector(list(inst.final) + [kappa]))
    return iota, final


def _smallest_kappa(inst: McpInstance) -> Fraction:
    # N = A + κ/3·J with A = B·diag(M, 0)·B⁻¹, ι′ = (ι,0)·B⁻¹ + κ/3, f′ = B·(f,0) + κ
    lowest = Fraction(0)
    for pair in inst.pairs:
        for matrix in pair:
            lowest = min(lowest, 3 * min(_conjugate(matrix, Fraction(0)).flatten()))
    iota0, final0 = _lift_vectors(inst, Fraction(0))
    lowest = min(lowest, 3 * min(iota0), min(final0))
    kappa = Fraction(1)
    while kappa < -lowest:
        kappa *= 2
    return kappa


def lift_to_nonnegative_3d(inst: McpInstance) -> McpInstance:
    """
    Three-dimensional nonnegative instance with the same accepted selections.

    Every matrix becomes N = B·diag(M, κ)·B⁻¹, the vectors become
    ι′ = (ι, κ)·B⁻¹ and f′ = B·(f, κ), so each selection's value grows by
    exactly κ^{n+2}, which is added to the threshold. κ is the smallest power
    of two (at least 1) making every entry nonnegative.

    Raises:
        ValidationError: If the instance is not two-dimensional
    """
    if inst.dimension != 2:
        raise ValidationError(f"lift expects a 2-dimensional instance, got {inst.dimension}")
    kappa = _smallest_kappa(inst)
    pairs = tuple(
        tuple(as_matrix(_conjugate(matrix, kappa).tolist()) for matrix in pair)
        for pair in inst.pairs
    )
    iota, final = _lift_vectors(inst, kappa)
    lifted = McpInstance(
        dimension=3,
        pairs=pairs,
        iota=as_vector(iota),
        final=as_vector(final),
        threshold=inst.threshold + kappa ** (inst.n + 2),
        kappa=kappa,
        source=inst.source,
    )
    logger.debug("lifted %d pairs with kappa=%s", inst.n, kappa)
    return lifted


def check_lift_structure(inst: McpInstance, original: Optional[McpInstance] = None) -> List[str]:
    """
    Check that an instance has the shape produced by the lift.

    Verifies B⁻¹·N·B = diag(M, κ) for every matrix, ι′·B = (ι, κ) and
    B⁻¹·f′ = (f, κ); with `original`, also that the recovered M, ι and f
    match it.

    Returns:
        List of violations, empty iff the structure holds
    """
    problems: List[str] = []
    if inst.dimension != 3:
        return [f"expected dimension 3, got {inst.dimension}"]
    if inst.kappa is None:
        return ["instance carries no kappa"]
    kappa = inst.kappa

    for j, pair in enumerate(inst.pairs):
        for bit, matrix in enumerate(pair):
            core = BASIS_INVERSE.dot(np.array(matrix, dtype=object)).dot(BASIS)
            if any(core[2, k] != 0 or core[k, 2] != 0 for k in range(2)) or core[2, 2] != kappa:
                problems.append(f"pair {j + 1} M{bit} is not block diagonal with corner kappa")
            elif original is not None and as_matrix(core[:2, :2].tolist()) != original.pairs[j][bit]:
                problems.append(f"pair {j + 1} M{bit} does not recover the original matrix")

    iota = fraction_vector(inst.iota).dot(BASIS)
    final = BASIS_INVERSE.dot(fraction_vector(inst.final))
    if iota[2] != kappa:
        problems.append("initial vector does not end in kappa")
    if final[2] != kappa:
        problems.append("final vector does not end in kappa")
    if original is not None:
        if as_vector(iota[:2]) != original.iota:
            problems.append("initial vector does not recover the original")
        if as_vector(final[:2]) != original.final:
            problems.append("final vector does not recover the original")
    return problems
