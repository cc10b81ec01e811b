"""
Matrix-Pair Chain Model

Defines d-dimensional matrix-pair chain instances over exact rationals.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from models.scalar import format_rational, parse_rational

Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]
MatrixPair = Tuple[Matrix, Matrix]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    """Freeze nested rows as a tuple matrix of Fractions."""
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def as_vector(values: Sequence) -> Vector:
    return tuple(Fraction(x) for x in values)


@dataclass(frozen=True)
class McpInstance:
    """
    A matrix-pair chain instance.

    Asks whether some selection σ ∈ {0,1}^n makes
    iota · pairs[0][σ1] ⋯ pairs[n-1][σn] · final ≥ threshold. Instances built
    by the lift and normalization stages record their offset `kappa` and
    band width `epsilon`.
    """

    dimension: int
    pairs: Tuple[MatrixPair, ...]
    iota: Vector
    final: Vector
    threshold: Fraction
    kappa: Optional[Fraction] = None
    epsilon: Optional[Fraction] = None
    source: str = ""

    def __post_init__(self):
        from errors import ValidationError

        d = self.dimension
        if d < 1:
            raise ValidationError(f"dimension must be positive, got {d}")
        if len(self.iota) != d or len(self.final) != d:
            raise ValidationError(f"initial/final vectors must have {d} entries")
        for j, pair in enumerate(self.pairs):
            if len(pair) != 2:
                raise ValidationError(f"pair {j + 1} does not hold two matrices")
            for bit, matrix in enumerate(pair):
                if len(matrix) != d or any(len(row) != d for row in matrix):
                    raise ValidationError(f"matrix M{bit} of pair {j + 1} is not {d}x{d}")

    @property
    def n(self) -> int:
        return len(self.pairs)

    def matrix(self, j: int, bit: int) -> np.ndarray:
        """Object-dtype numpy matrix of pair j (0-based) and selection bit."""
        return np.array(self.pairs[j][bit], dtype=object)

    def entries(self) -> Iterator[Fraction]:
        """Every matrix and vector entry."""
        for pair in self.pairs:
            for matrix in pair:
                for row in matrix:
                    yield from row
        yield from self.iota
        yield from self.final

    @property
    def nonnegative(self) -> bool:
        return all(x >= 0 for x in self.entries())

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert instance to a JSON-safe dictionary with rationals as "p/q".

        Returns:
            Dictionary representation of the instance
        """
        def vec(v):
            return [format_rational(x) for x in v]

        return {
            "dimension": self.dimension,
            "pairs": [[[vec(row) for row in m] for m in pair] for pair in self.pairs],
            "iota": vec(self.iota),
            "final": vec(self.final),
            "threshold": format_rational(self.threshold),
            "kappa": None if self.kappa is None else format_rational(self.kappa),
            "epsilon": None if self.epsilon is None else format_rational(self.epsilon),
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'McpInstance':
        def vec(v):
            return tuple(parse_rational(x) for x in v)

        def optional(x):
            return None if x is None else parse_rational(x)

        return cls(
            dimension=data["dimension"],
            pairs=tuple(
                tuple(tuple(vec(row) for row in m) for m in pair) for pair in data["pairs"]
            ),
            iota=vec(data["iota"]),
            final=vec(data["final"]),
            threshold=parse_rational(data["threshold"]),
            kappa=optional(data.get("kappa")),
            epsilon=optional(data.get("epsilon")),
            source=data.get("source", ""),
        )
