"""
Linear Algebra

Exact Fraction Gauss-Jordan elimination and float solves over numpy arrays.
"""

from fractions import Fraction
from typing import Sequence

import numpy as np


def fraction_matrix(rows: Sequence[Sequence]) -> np.ndarray:
    """Object-dtype numpy matrix with Fraction entries."""
    return np.array([[Fraction(x) for x in row] for row in rows], dtype=object)


def fraction_vector(values: Sequence) -> np.ndarray:
    return np.array([Fraction(x) for x in values], dtype=object)


def identity_matrix(n: int) -> np.ndarray:
    return np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)


def solve_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Solve a·x = b exactly by Gauss-Jordan elimination over Fractions.

    Args:
        a: Square object-dtype matrix of Fractions
        b: Right-hand side vector

    Returns:
        Solution vector of Fractions

    Raises:
        ArithmeticError: If the matrix is singular
    """
    n = a.shape[0]
    if n == 0:
        return np.array([], dtype=object)
    augmented = np.empty((n, n + 1), dtype=object)
    augmented[:, :n] = a
    augmented[:, n] = b

    for i in range(n):
        # find a nonzero pivot in column i
        for j in range(i, n):
            if augmented[j, i] != 0:
                if j != i:
                    augmented[[i, j]] = augmented[[j, i]]
                break
        else:
            raise ArithmeticError("matrix is singular")

        augmented[i, :] = augmented[i, :] / augmented[i, i]
        for j in range(n):
            if j != i and augmented[j, i] != 0:
                augmented[j, :] = augmented[j, :] - augmented[j, i] * augmented[i, :]

    return augmented[:, n].copy()


def solve_float(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a·x = b in double precision."""
    if a.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.solve(a.astype(float), b.astype(float))


def inverse_exact(a: np.ndarray) -> np.ndarray:
    """Exact inverse via one solve per unit column."""
    n = a.shape[0]
    unit = identity_matrix(n)
    columns = [solve_exact(a, unit[:, k]) for k in range(n)]
    return np.array(columns, dtype=object).T


def chain_product(matrices: Sequence[np.ndarray], dimension: int) -> np.ndarray:
    """Left-to-right product of square matrices (identity for an empty chain)."""
    result = identity_matrix(dimension)
    for m in matrices:
        result = result.dot(m)
    return result
