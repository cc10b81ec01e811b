"""
Configuration for Tree Witness Engine

Defines solver tolerances, search caps and storage locations.
"""

from dataclasses import dataclass, asdict, fields, replace
from typing import Any, Dict


@dataclass(frozen=True)
class Config:
    """Engine configuration shared by solvers, stages and the CLI."""

    tolerance: float = 1e-9
    iteration_tolerance: float = 1e-10
    max_iterations: int = 100000
    exact_width_cap: int = 12
    mcp_brute_cap: int = 24
    interface_cap: int = 8
    brute_witness_cap: int = 22
    chain_verify_cap: int = 4
    results_dir: str = "results"
    telemetry_dir: str = "telemetry"

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert configuration to dictionary.

        Returns:
            Dictionary representation of configuration
        """
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Config':
        """
        Create configuration from dictionary.

        Args:
            data: Field values; missing fields keep their defaults

        Returns:
            Config instance

        Raises:
            ValidationError: If data contains unknown keys
        """
        from errors import ValidationError

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"Unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, **overrides: Any) -> 'Config':
        """Return a copy with the given non-None fields replaced."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


DEFAULT_CONFIG = Config()


def resolve(config: 'Config' = None) -> Config:
    """Return config, or the defaults when None."""
    return config if config is not None else DEFAULT_CONFIG
