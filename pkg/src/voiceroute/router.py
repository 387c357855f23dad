"""Rule-based choice between online and offline inference."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any

from .metrics import SystemMetrics


class Mode(str, enum.Enum):
    ONLINE = "Online"
    OFFLINE = "Offline"


class Rule(str, enum.Enum):
    CPU_AND_TEMP_HIGH = "CpuAndTempHigh"
    LATENCY_HIGH = "LatencyHigh"


@dataclass(frozen=True)
class RoutingThresholds:
    cpu_pct: float = 80.0
    temp_c: float = 50.0
    latency_ms: float = 150.0

    def __post_init__(self) -> None:
        for name in ("cpu_pct", "temp_c", "latency_ms"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"threshold {name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class RoutingDecision:
    mode: Mode
    fired_rules: frozenset[Rule]
    metrics_used: SystemMetrics

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            # stable order for byte-identical artifacts
            "fired_rules": sorted(r.value for r in self.fired_rules),
            "metrics_used": self.metrics_used.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RoutingDecision":
        return cls(
            mode=Mode(d["mode"]),
            fired_rules=frozenset(Rule(r) for r in d["fired_rules"]),
            metrics_used=SystemMetrics.from_dict(d["metrics_used"]),
        )


def decide(metrics: SystemMetrics, thresholds: RoutingThresholds = RoutingThresholds()) -> RoutingDecision:
    """Offline iff (cpu AND temp above threshold) OR latency above threshold.

    Comparisons are strict, so a reading equal to its threshold does not fire.
    A failed latency probe (+inf) always fires the latency rule.
    """
    fired = set()
    if metrics.cpu_pct > thresholds.cpu_pct and metrics.temp_c > thresholds.temp_c:
        fired.add(Rule.CPU_AND_TEMP_HIGH)
    if metrics.latency_ms > thresholds.latency_ms:
        fired.add(Rule.LATENCY_HIGH)
    mode = Mode.OFFLINE if fired else Mode.ONLINE
    return RoutingDecision(mode=mode, fired_rules=frozenset(fired), metrics_used=metrics)
