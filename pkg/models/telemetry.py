"""
Telemetry Data Model

One event per solver call or pipeline stage: which run, which input, how
long it took and the solver's own counters.
"""

from dataclasses import asdict, dataclass, field, fields
from datetime import datetime
from typing import Any, Dict, Mapping, Optional


@dataclass
class TelemetryEvent:
    """A timed solver or stage call."""

    run_id: str
    stage: str
    input_id: str
    output_id: Optional[str] = None
    latency_ms: int = 0
    counters: Dict[str, int] = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.utcnow().isoformat() + 'Z')
    replayable: bool = True
    replay_of: Optional[str] = None

    @staticmethod
    def counters_from_stats(stats: Mapping[str, Any]) -> Dict[str, int]:
        """Integer counters of a solve statistics dict (nested tables are dropped)."""
        return {k: v for k, v in sorted(stats.items()) if isinstance(v, int) and not isinstance(v, bool)}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'TelemetryEvent':
        """Rebuild an event from a JSONL line; unknown keys are ignored."""
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})
