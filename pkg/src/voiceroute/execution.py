"""Device registry and dispatch onto simulated on/off drivers."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime
from typing import Any

from .command import CommandVocabulary, DeviceCommand
from .timeutil import from_rfc3339, to_rfc3339, utcnow


class Power(str, enum.Enum):
    ON = "On"
    OFF = "Off"


ACTION_POWER = {"turn_on": Power.ON, "turn_off": Power.OFF}


@dataclass(frozen=True)
class DeviceState:
    power: Power
    last_changed_at: datetime | None

    def to_dict(self) -> dict[str, Any]:
        return {"power": self.power.value, "last_changed_at": to_rfc3339(self.last_changed_at)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DeviceState":
        return cls(Power(d["power"]), from_rfc3339(d.get("last_changed_at")))


class DeviceDriver:
    """Boundary to a physical or simulated device. Subclasses implement ``apply``."""

    def apply(self, action: str) -> DeviceState:
        raise NotImplementedError

    @property
    def state(self) -> DeviceState:
        raise NotImplementedError


class SimulatedSwitch(DeviceDriver):
    def __init__(self) -> None:
        self._state = DeviceState(Power.OFF, utcnow())

    def apply(self, action: str) -> DeviceState:
        try:
            power = ACTION_POWER[action]
        except KeyError:
            raise ValueError(f"switch does not support action {action!r}") from None
        if power is not self._state.power:
            self._state = DeviceState(power, utcnow())
        return self._state

    @property
    def state(self) -> DeviceState:
        return self._state


class ExecStatus(str, enum.Enum):
    EXECUTED = "Executed"
    REJECTED = "Rejected"
    DRIVER_ERROR = "DriverError"


@dataclass(frozen=True)
class ExecutionResult:
    status: ExecStatus
    command: DeviceCommand
    state_after: DeviceState | None = None
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "command": self.command.to_dict(),
            "state_after": self.state_after.to_dict() if self.state_after else None,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExecutionResult":
        return cls(
            status=ExecStatus(d["status"]),
            command=DeviceCommand.from_dict(d["command"]),
            state_after=DeviceState.from_dict(d["state_after"]) if d.get("state_after") else None,
            detail=d.get("detail", ""),
        )


class DeviceRegistry:
    def __init__(self, devices: dict[tuple[str, int], DeviceDriver]) -> None:
        self.devices = devices

    @classmethod
    def from_vocab(cls, vocab: CommandVocabulary, driver: str = "sim") -> "DeviceRegistry":
        if driver != "sim":
            raise ValueError(f"device driver {driver!r} is not available; only 'sim' is implemented")
        return cls({(dev, i): SimulatedSwitch() for dev, n in vocab.devices.items() for i in range(1, n + 1)})

    def keys(self) -> list[tuple[str, int]]:
        return list(self.devices)


def execute(registry: DeviceRegistry, cmd: DeviceCommand) -> ExecutionResult:
    if not cmd.complete:
        return ExecutionResult(ExecStatus.REJECTED, cmd, detail="command is incomplete")
    driver = registry.devices.get((cmd.device, cmd.index))
    if driver is None:
        return ExecutionResult(ExecStatus.REJECTED, cmd, detail=f"no device registered as {cmd.device} {cmd.index}")
    try:
        state = driver.apply(cmd.action)
    except Exception as exc:
        return ExecutionResult(ExecStatus.DRIVER_ERROR, cmd, detail=str(exc))
    return ExecutionResult(ExecStatus.EXECUTED, cmd, state, detail="ok")


def device_state(registry: DeviceRegistry, device: str, index: int) -> DeviceState:
    try:
        return registry.devices[(device, index)].state
    except KeyError:
        raise KeyError(f"no device registered as {device} {index}") from None
