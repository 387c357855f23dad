"""Evaluation corpus manifest: ``{"samples": [...]}``."""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .command import DeviceCommand
from .config import ConfigError


class Category(str, enum.Enum):
    COMPLETE = "complete"
    INDEX_VARIANT = "index_variant"
    COMPOUND = "compound"
    UNSUPPORTED_DEVICE = "unsupported_device"
    IRRELEVANT = "irrelevant"


_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.\-]*$")


@dataclass(frozen=True)
class CorpusSample:
    sample_id: str
    reference_transcript: str
    hypothesis_transcript: str | None = None
    audio_path: str | None = None
    expected_commands: tuple[DeviceCommand, ...] = ()
    category: Category = Category.COMPLETE
    # fixture readings for the metric providers: cpu_pct, temp_c, latency_ms
    metrics: dict[str, float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not _SAFE_ID.match(self.sample_id):
            raise ValueError(f"sample_id {self.sample_id!r} is not a safe file name")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CorpusSample":
        return cls(
            sample_id=str(d["sample_id"]),
            reference_transcript=d["reference_transcript"],
            hypothesis_transcript=d.get("hypothesis_transcript"),
            audio_path=d.get("audio_path"),
            expected_commands=tuple(DeviceCommand.from_dict(c) for c in d.get("expected_commands", [])),
            category=Category(d.get("category", "complete")),
            metrics=d.get("metrics"),
        )

    def to_dict(self) -> dict[str, Any]:
        d = {
            "sample_id": self.sample_id,
            "reference_transcript": self.reference_transcript,
            "hypothesis_transcript": self.hypothesis_transcript,
            "audio_path": self.audio_path,
            "expected_commands": [c.to_dict() for c in self.expected_commands],
            "category": self.category.value,
        }
        if self.metrics is not None:
            d["metrics"] = self.metrics
        return d


def parse_manifest(data: Any) -> list[CorpusSample]:
    if not isinstance(data, dict) or not isinstance(data.get("samples"), list):
        raise ConfigError("corpus manifest must be an object with a 'samples' list")
    samples = []
    seen = set()
    for i, entry in enumerate(data["samples"]):
        try:
            sample = CorpusSample.from_dict(entry)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"corpus sample #{i} is invalid: {exc}") from exc
        if sample.sample_id in seen:
            raise ConfigError(f"duplicate sample_id {sample.sample_id!r}")
        seen.add(sample.sample_id)
        samples.append(sample)
    return samples


def load_corpus(path: str | os.PathLike | None = None) -> list[CorpusSample]:
    """Load a manifest; ``None`` loads the bundled 80-sample corpus."""
    try:
        if path is None:
            text = resources.files("voiceroute.data").joinpath("corpus.json").read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corpus manifest is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read corpus manifest {path}: {exc}") from exc
    return parse_manifest(data)
