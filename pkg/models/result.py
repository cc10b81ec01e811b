"""
Result Data Model

Defines witness results and the stored result documents.
"""

from dataclasses import dataclass, field, asdict
from datetime import datetime
from typing import Any, Dict, FrozenSet, List, Optional

from models.scalar import Scalar, format_rational

DOCUMENT_KINDS = (
    "witness", "baseline", "mcp", "mcp_brute", "partition_check", "width", "chain_verify",
    "mcp2", "mcp3", "normalized", "chain",
)


@dataclass
class WitnessResult:
    """Minimal witness (or infeasibility) with solve statistics."""

    feasible: bool
    states: FrozenSet[int] = frozenset()
    value: Optional[Scalar] = None
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> Optional[int]:
        return len(self.states) if self.feasible else None

    def content(self, mode: str, threshold: Scalar) -> Dict[str, str]:
        """Ordered key/value fields for a result document."""
        content = {
            "mode": mode,
            "threshold": format_rational(threshold),
            "feasible": "yes" if self.feasible else "no",
        }
        if self.feasible:
            content["size"] = str(self.size)
            content["states"] = " ".join(str(s) for s in sorted(self.states))
            content["value"] = format_rational(self.value)
        return content

    @classmethod
    def infeasible(cls, value: Scalar, stats: Optional[Dict[str, Any]] = None) -> 'WitnessResult':
        """The full system reaches only `value` < threshold."""
        return cls(feasible=False, value=value, stats=dict(stats or {}))


@dataclass
class ResultDocument:
    """A persisted command or pipeline-stage result."""

    document_id: str
    kind: str
    content: Dict[str, str]
    derived_from: List[str] = field(default_factory=list)
    stats: Dict[str, Any] = field(default_factory=dict)
    payload: Dict[str, Any] = field(default_factory=dict)
    version: int = 1
    created_at: str = field(default_factory=lambda: datetime.utcnow().isoformat() + 'Z')

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert document to dictionary for JSON serialization.

        Returns:
            Dictionary representation of document
        """
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ResultDocument':
        """
        Create document from dictionary.

        Args:
            data: Dictionary containing document data

        Returns:
            ResultDocument instance
        """
        return cls(**data)

    def render(self) -> str:
        """
        Deterministic "key: value" text.

        Content fields come in insertion order; stats follow under a
        "stats:" header so golden comparisons can cut there.
        """
        lines = [f"{key}: {value}" for key, value in self.content.items()]
        if self.stats:
            lines.append("stats:")
            for key in sorted(self.stats):
                lines.append(f"  {key}: {_render_stat(self.stats[key])}")
        return "\n".join(lines) + "\n"


def _render_stat(value: Any) -> str:
    if isinstance(value, dict):
        return " ".join(f"{k}={v}" for k, v in sorted(value.items(), key=lambda kv: str(kv[0])))
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def make_document_id(kind: str, run_id: str, version: int = 1) -> str:
    """Build "<kind>_<YYYYMMDD>_<run_id>_v<version>"."""
    date_str = datetime.utcnow().strftime('%Y%m%d')
    return f"{kind}_{date_str}_{run_id}_v{version}"


def document_base(kind: str, run_id: str) -> str:
    """Document id without its version suffix."""
    return make_document_id(kind, run_id).rsplit('_v', 1)[0]
