"""
Partial Subsystem Model

A state subset below an interface, with its vector of interface values.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Tuple

from models.scalar import Scalar


@dataclass(frozen=True)
class PartialSubsystem:
    """
    States T kept below interface I, and the I-point val_I(T).

    `point[k]` is the reach value of `interface[k]`; it is zero for interface
    states outside T.
    """

    interface: Tuple[int, ...]
    states: FrozenSet[int]
    point: Tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.point) != len(self.interface):
            from errors import ValidationError
            raise ValidationError(
                f"point has {len(self.point)} entries for an interface of {len(self.interface)}"
            )

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def sorted_states(self) -> Tuple[int, ...]:
        return tuple(sorted(self.states))

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Order by size, then lexicographically by state set."""
        return self.size, self.sorted_states

    def values(self) -> Dict[int, Scalar]:
        """Interface state -> value."""
        return dict(zip(self.interface, self.point))

    @classmethod
    def empty(cls, interface: Tuple[int, ...], zero: Scalar) -> 'PartialSubsystem':
        return cls(interface=interface, states=frozenset(), point=tuple(zero for _ in interface))
