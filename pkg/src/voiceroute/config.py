"""Run configuration, loaded from a JSON document."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Any

from .command import CommandVocabulary
from .metrics import BalancerConfig
from .router import RoutingThresholds


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProbeConfig:
    endpoint: str = "https://api.openai.com/v1"
    timeout_ms: float = 1000.0
    window: int = 3


@dataclass(frozen=True)
class MetricsConfig:
    provider: str = "fixture"  # "fixture" | "real"


@dataclass(frozen=True)
class OnlineBackendConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-3.5-turbo"
    api_key_env: str = "OPENAI_API_KEY"


@dataclass(frozen=True)
class OfflineBackendConfig:
    command: str | None = None
    args: tuple[str, ...] = ()
    model: str = "TinyLlama-1.1B-Chat-v1.0"


@dataclass(frozen=True)
class BackendsConfig:
    online: OnlineBackendConfig = field(default_factory=OnlineBackendConfig)
    offline: OfflineBackendConfig = field(default_factory=OfflineBackendConfig)
    timeout_ms: float = 10_000.0
    test_mode: bool = True


@dataclass(frozen=True)
class AsrConfig:
    adapter: str = "fixture"  # "fixture" | "external"
    command: str | None = None
    args: tuple[str, ...] = ()
    timeout_ms: float = 30_000.0


@dataclass(frozen=True)
class HistoryConfig:
    path: str = "history.jsonl"


@dataclass(frozen=True)
class DevicesConfig:
    driver: str = "sim"


@dataclass(frozen=True)
class Config:
    balancer: BalancerConfig = field(default_factory=BalancerConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    thresholds: RoutingThresholds = field(default_factory=RoutingThresholds)
    backends: BackendsConfig = field(default_factory=BackendsConfig)
    vocab: CommandVocabulary = field(default_factory=CommandVocabulary)
    history: HistoryConfig = field(default_factory=HistoryConfig)
    asr: AsrConfig = field(default_factory=AsrConfig)
    devices: DevicesConfig = field(default_factory=DevicesConfig)

    def with_seed(self, seed: int) -> "Config":
        return dataclasses.replace(self, balancer=dataclasses.replace(self.balancer, seed=seed))

    def validate(self) -> "Config":
        if self.metrics.provider not in ("fixture", "real"):
            raise ConfigError(f"metrics.provider must be 'fixture' or 'real', got {self.metrics.provider!r}")
        if self.asr.adapter not in ("fixture", "external"):
            raise ConfigError(f"asr.adapter must be 'fixture' or 'external', got {self.asr.adapter!r}")
        if self.asr.adapter == "external" and not self.asr.command:
            raise ConfigError("asr.adapter 'external' requires asr.command")
        if not self.backends.test_mode and not self.backends.offline.command:
            raise ConfigError("backends.offline.command is required unless backends.test_mode is set")
        if self.devices.driver != "sim":
            raise ConfigError(f"devices.driver {self.devices.driver!r} is not supported (only 'sim')")
        return self


def _build(cls, data: Any, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'} must be an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(prefix + k for k in unknown))}")
    kwargs = {}
    for name, value in data.items():
        default = fields[name].default_factory() if fields[name].default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{prefix}{name}.")
        elif isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {prefix.rstrip('.') or 'config'}: {exc}") from exc


def config_from_dict(data: dict[str, Any]) -> Config:
    return _build(Config, data, "").validate()


def load_config(path: str | os.PathLike | None) -> Config:
    if path is None:
        return Config().validate()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg: Config) -> dict[str, Any]:
    return dataclasses.asdict(cfg)
