"""Structured device commands: parsing model output, three-layer validation, index repair."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .history import HistoryStore

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}

_IDENT_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def snake(s: str) -> str:
    return re.sub(r"[\s\-]+", "_", s.strip().lower())


@dataclass(frozen=True)
class CommandVocabulary:
    actions: tuple[str, ...] = ("turn_on", "turn_off")
    devices: dict[str, int] = field(default_factory=lambda: {"light": 2, "speaker": 1})

    def __post_init__(self) -> None:
        for ident in (*self.actions, *self.devices):
            if not _IDENT_RE.match(ident):
                raise ValueError(f"vocabulary identifier must be lowercase snake_case: {ident!r}")
        for device, count in self.devices.items():
            if count < 1:
                raise ValueError(f"device {device!r} needs at least one instance")

    def __hash__(self) -> int:
        return hash((self.actions, tuple(sorted(self.devices.items()))))


@dataclass(frozen=True)
class DeviceCommand:
    action: str | None
    device: str | None
    index: int | None = None

    @property
    def complete(self) -> bool:
        return self.action is not None and self.device is not None and self.index is not None

    def to_dict(self) -> dict[str, Any]:
        return {"action": self.action, "device": self.device, "index": self.index}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DeviceCommand":
        return cls(action=d.get("action"), device=d.get("device"), index=d.get("index"))


class Layer(str, enum.Enum):
    ACTION = "action"
    DEVICE = "device"
    INDEX = "index"


class Reason(str, enum.Enum):
    MISSING = "missing"
    UNSUPPORTED = "unsupported"
    OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True)
class ValidationFailure:
    layer: Layer
    reason: Reason


@dataclass(frozen=True)
class ValidationReport:
    action_ok: bool
    device_ok: bool
    index_ok: bool
    failures: tuple[ValidationFailure, ...] = ()

    @property
    def clean(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "action_ok": self.action_ok,
            "device_ok": self.device_ok,
            "index_ok": self.index_ok,
            "failures": [{"layer": f.layer.value, "reason": f.reason.value} for f in self.failures],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ValidationReport":
        return cls(
            action_ok=d["action_ok"],
            device_ok=d["device_ok"],
            index_ok=d["index_ok"],
            failures=tuple(ValidationFailure(Layer(f["layer"]), Reason(f["reason"])) for f in d["failures"]),
        )


class RepairStatus(str, enum.Enum):
    NOT_NEEDED = "NotNeeded"
    REPAIRED = "Repaired"
    IRREPARABLE = "Irreparable"


@dataclass(frozen=True)
class Repair:
    layer: Layer
    old_value: Any
    new_value: Any
    source: str  # "history" | "default"


@dataclass(frozen=True)
class RepairOutcome:
    status: RepairStatus
    command: DeviceCommand
    repairs_applied: tuple[Repair, ...] = ()

    @property
    def executable(self) -> bool:
        return self.status is not RepairStatus.IRREPARABLE

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "command": self.command.to_dict(),
            "repairs_applied": [
                {"layer": r.layer.value, "old_value": r.old_value, "new_value": r.new_value, "source": r.source}
                for r in self.repairs_applied
            ],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RepairOutcome":
        return cls(
            status=RepairStatus(d["status"]),
            command=DeviceCommand.from_dict(d["command"]),
            repairs_applied=tuple(
                Repair(Layer(r["layer"]), r["old_value"], r["new_value"], r["source"]) for r in d["repairs_applied"]
            ),
        )


class ParseFailure(ValueError):
    """Model output held no usable JSON command list."""

    def __init__(self, message: str, snippet: str) -> None:
        super().__init__(f"{message}: {snippet!r}")
        self.snippet = snippet


def _snippet(raw: str, limit: int = 120) -> str:
    return raw if len(raw) <= limit else raw[:limit] + "..."


def _first_json(raw: str) -> list | dict | None:
    decoder = json.JSONDecoder()
    for i, ch in enumerate(raw):
        if ch not in "[{":
            continue
        try:
            value, _ = decoder.raw_decode(raw, i)
        except json.JSONDecodeError:
            continue
        return value
    return None


def _norm_ident(value: Any) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        value = str(value)
    value = snake(value)
    return value or None


def _norm_index(value: Any) -> int | None:
    if value is None or isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        s = value.strip().lower()
        if re.fullmatch(r"[+-]?\d+", s):
            return int(s)
        return NUMBER_WORDS.get(s)
    return None


def parse_model_output(raw: str) -> list[DeviceCommand]:
    """Extract the command list from raw model text.

    The first decodable JSON array or object wins; prose and markdown fences
    around it are ignored. A bare object becomes a one-element list. ``[]`` is a
    valid answer meaning "nothing to do".
    """
    value = _first_json(raw)
    if value is None:
        raise ParseFailure("no JSON found in model output", _snippet(raw))
    items = [value] if isinstance(value, dict) else value
    commands = []
    for item in items:
        if not isinstance(item, dict):
            raise ParseFailure("command entries must be JSON objects", _snippet(json.dumps(item)))
        action = _norm_ident(item.get("action"))
        device = _norm_ident(item.get("device"))
        if action is None and device is None:
            raise ParseFailure("command lacks both action and device", _snippet(json.dumps(item)))
        commands.append(DeviceCommand(action, device, _norm_index(item.get("index"))))
    return commands


def commands_to_json(cmds: list[DeviceCommand]) -> str:
    return json.dumps([c.to_dict() for c in cmds])


def validate(cmd: DeviceCommand, vocab: CommandVocabulary) -> ValidationReport:
    """Check action, device, and index independently; every failing layer is reported."""
    failures = []

    if cmd.action is None:
        failures.append(ValidationFailure(Layer.ACTION, Reason.MISSING))
    elif cmd.action not in vocab.actions:
        failures.append(ValidationFailure(Layer.ACTION, Reason.UNSUPPORTED))

    if cmd.device is None:
        failures.append(ValidationFailure(Layer.DEVICE, Reason.MISSING))
    elif cmd.device not in vocab.devices:
        failures.append(ValidationFailure(Layer.DEVICE, Reason.UNSUPPORTED))

    if cmd.index is None:
        failures.append(ValidationFailure(Layer.INDEX, Reason.MISSING))
    else:
        # without a known device the only bound available is the lower one
        upper = vocab.devices.get(cmd.device) if cmd.device is not None else None
        if cmd.index < 1 or (upper is not None and cmd.index > upper):
            failures.append(ValidationFailure(Layer.INDEX, Reason.OUT_OF_RANGE))

    bad = {f.layer for f in failures}
    return ValidationReport(
        action_ok=Layer.ACTION not in bad,
        device_ok=Layer.DEVICE not in bad,
        index_ok=Layer.INDEX not in bad,
        failures=tuple(failures),
    )


def repair(
    cmd: DeviceCommand,
    report: ValidationReport,
    history: "HistoryStore",
    vocab: CommandVocabulary,
) -> RepairOutcome:
    """Fill a missing index from usage history; everything else is rejected.

    Only the index layer is ever repaired. The most frequently used successful
    index for the same (device, action) pair is chosen, falling back to 1 when
    history has nothing usable.
    """
    if report.clean:
        return RepairOutcome(RepairStatus.NOT_NEEDED, cmd)
    if report.failures != (ValidationFailure(Layer.INDEX, Reason.MISSING),):
        return RepairOutcome(RepairStatus.IRREPARABLE, cmd)

    index = history.most_frequent_index(cmd.device, cmd.action)
    source = "history"
    if index is None or not 1 <= index <= vocab.devices[cmd.device]:
        index, source = 1, "default"
    fixed = DeviceCommand(cmd.action, cmd.device, index)
    if not validate(fixed, vocab).clean:
        return RepairOutcome(RepairStatus.IRREPARABLE, cmd)
    return RepairOutcome(RepairStatus.REPAIRED, fixed, (Repair(Layer.INDEX, None, index, source),))


def canonical_text(cmd: DeviceCommand) -> str:
    """Render a complete command as e.g. ``"turn on light 1"``."""
    if not cmd.complete:
        raise ValueError(f"cannot render incomplete command {cmd.to_dict()}")
    return f"{cmd.action.replace('_', ' ')} {cmd.device.replace('_', ' ')} {cmd.index}"
