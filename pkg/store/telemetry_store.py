"""
Telemetry Store

Handles persistence of solver and pipeline telemetry.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from models.telemetry import TelemetryEvent


class TelemetryStore:
    """Stores telemetry events in append-only JSONL files."""

    def __init__(self, telemetry_dir: str = "telemetry"):
        """
        Initialize telemetry store.

        Args:
            telemetry_dir: Directory for telemetry files
        """
        self.telemetry_dir = Path(telemetry_dir)
        self.telemetry_dir.mkdir(parents=True, exist_ok=True)

    def _log_file(self, date_str: Optional[str] = None) -> Path:
        date_str = date_str or datetime.utcnow().strftime('%Y-%m-%d')
        return self.telemetry_dir / f"{date_str}.jsonl"

    def append_event(self, event: TelemetryEvent) -> None:
        """
        Append telemetry event to date-based JSONL file.

        Args:
            event: Event to record
        """
        event_dict = event.to_dict()
        with open(self._log_file(), 'a') as f:
            f.write(json.dumps(event_dict, default=str) + '\n')

    def read_events(self, date_str: Optional[str] = None, run_id: Optional[str] = None) -> List[TelemetryEvent]:
        """
        Read the events of one day, optionally for a single run.

        Args:
            date_str: "YYYY-MM-DD" (default: today, UTC)
            run_id: Keep only events of this run

        Returns:
            Events in append order
        """
        log_file = self._log_file(date_str)
        if not log_file.exists():
            return []
        with open(log_file) as f:
            events = [TelemetryEvent.from_dict(json.loads(line)) for line in f if line.strip()]
        if run_id is not None:
            events = [e for e in events if e.run_id == run_id]
        return events
