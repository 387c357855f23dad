"""Append-only JSON Lines log of executed commands."""

from __future__ import annotations

import enum
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from .timeutil import from_rfc3339, to_rfc3339

log = logging.getLogger(__name__)


class Outcome(str, enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"


class HistoryWriteError(OSError):
    """Appending to the history file failed; the execution itself still stands."""


@dataclass(frozen=True)
class HistoryRecord:
    action: str
    device: str
    index: int
    executed_at: datetime
    outcome: Outcome = Outcome.SUCCESS
    sample_id: str | None = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"history index must be >= 1, got {self.index}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "action": self.action,
            "device": self.device,
            "index": self.index,
            "executed_at": to_rfc3339(self.executed_at),
            "outcome": self.outcome.value,
            "sample_id": self.sample_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HistoryRecord":
        return cls(
            action=str(d["action"]),
            device=str(d["device"]),
            index=int(d["index"]),
            executed_at=from_rfc3339(d["executed_at"]),
            outcome=Outcome(d["outcome"]),
            sample_id=d.get("sample_id"),
        )


@dataclass
class HistoryStore:
    """Ordered records plus the file they mirror (``path=None`` keeps it in memory)."""

    path: Path | None = None
    records: list[HistoryRecord] = field(default_factory=list)
    skipped_lines: int = 0

    def append(self, record: HistoryRecord) -> "HistoryStore":
        if self.records and record.executed_at < self.records[-1].executed_at:
            raise ValueError("executed_at must be non-decreasing within a history file")
        if self.path is not None:
            line = json.dumps(record.to_dict(), sort_keys=True) + "\n"
            try:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line)
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise HistoryWriteError(f"could not append to history {self.path}: {exc}") from exc
        self.records.append(record)
        return self

    def most_frequent_index(self, device: str, action: str) -> int | None:
        """Most used successful index for (device, action); ties go to the lowest index."""
        counts = Counter(
            r.index
            for r in self.records
            if r.device == device and r.action == action and r.outcome is Outcome.SUCCESS
        )
        if not counts:
            return None
        return min(counts, key=lambda idx: (-counts[idx], idx))

    def __len__(self) -> int:
        return len(self.records)


def load(path: str | os.PathLike) -> HistoryStore:
    """Read a history file, creating an empty one if it does not exist.

    Malformed lines are skipped and counted in ``skipped_lines``.
    """
    path = Path(path)
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.touch()
        return HistoryStore(path=path)
    store = HistoryStore(path=path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                store.records.append(HistoryRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                store.skipped_lines += 1
                log.warning("%s:%d: skipping malformed history line (%s)", path, lineno, exc)
    return store
