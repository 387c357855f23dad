"""Runtime metric sampling, latency probing, and the seeded metric balancer."""

from __future__ import annotations

import logging
import math
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime
from statistics import fmean
from typing import Any, Callable

import httpx

from .timeutil import from_rfc3339, to_rfc3339, utcnow

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240607

# Perturbation ranges are half-open on the low side: (low, high].
PERTURBED_CPU_RANGE = (80.0, 100.0)
PERTURBED_TEMP_RANGE = (50.0, 70.0)


@dataclass(frozen=True)
class SystemMetrics:
    cpu_pct: float
    temp_c: float
    latency_ms: float
    sampled_at: datetime | None = None
    cpu_degraded: bool = False
    temp_degraded: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.cpu_pct <= 100.0:
            raise ValueError(f"cpu_pct out of [0, 100]: {self.cpu_pct}")
        if not math.isfinite(self.temp_c):
            raise ValueError(f"temp_c must be finite: {self.temp_c}")
        if math.isnan(self.latency_ms) or self.latency_ms < 0:
            raise ValueError(f"latency_ms must be >= 0: {self.latency_ms}")

    @property
    def probe_failed(self) -> bool:
        return math.isinf(self.latency_ms)

    def to_dict(self) -> dict[str, Any]:
        return {
            "cpu_pct": self.cpu_pct,
            "temp_c": self.temp_c,
            "latency_ms": None if self.probe_failed else self.latency_ms,
            "probe_failed": self.probe_failed,
            "cpu_degraded": self.cpu_degraded,
            "temp_degraded": self.temp_degraded,
            "sampled_at": to_rfc3339(self.sampled_at),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SystemMetrics":
        latency = d.get("latency_ms")
        if latency is None or d.get("probe_failed"):
            latency = math.inf
        return cls(
            cpu_pct=float(d["cpu_pct"]),
            temp_c=float(d["temp_c"]),
            latency_ms=float(latency),
            sampled_at=from_rfc3339(d.get("sampled_at")),
            cpu_degraded=bool(d.get("cpu_degraded", False)),
            temp_degraded=bool(d.get("temp_degraded", False)),
        )


@dataclass(frozen=True)
class BalancerConfig:
    enabled: bool = True
    probability: float = 0.5
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"balancer probability out of [0, 1]: {self.probability}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"balancer seed must be a 64-bit unsigned integer: {self.seed}")


@dataclass(frozen=True)
class PerturbationRecord:
    fired: bool
    original: SystemMetrics
    perturbed: SystemMetrics

    def to_dict(self) -> dict[str, Any]:
        return {
            "fired": self.fired,
            "original": self.original.to_dict(),
            "perturbed": self.perturbed.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PerturbationRecord":
        return cls(
            fired=bool(d["fired"]),
            original=SystemMetrics.from_dict(d["original"]),
            perturbed=SystemMetrics.from_dict(d["perturbed"]),
        )


def make_rng(cfg: BalancerConfig) -> random.Random:
    return random.Random(cfg.seed)


def perturb(metrics: SystemMetrics, cfg: BalancerConfig, rng: random.Random) -> PerturbationRecord:
    """Push cpu and temperature past the offline thresholds with probability ``cfg.probability``.

    Exactly three draws are taken from ``rng`` on every call, so the stream stays
    aligned across samples whether or not the balancer fires (or is disabled).
    Latency is never touched.
    """
    coin, cpu_u, temp_u = rng.random(), rng.random(), rng.random()
    fired = cfg.enabled and coin < cfg.probability
    if not fired:
        return PerturbationRecord(fired=False, original=metrics, perturbed=metrics)
    # random() is in [0, 1), so high - width * u lands in (low, high].
    cpu_lo, cpu_hi = PERTURBED_CPU_RANGE
    temp_lo, temp_hi = PERTURBED_TEMP_RANGE
    perturbed = replace(
        metrics,
        cpu_pct=cpu_hi - (cpu_hi - cpu_lo) * cpu_u,
        temp_c=temp_hi - (temp_hi - temp_lo) * temp_u,
    )
    return PerturbationRecord(fired=True, original=metrics, perturbed=perturbed)


def sample_system(
    cpu_provider: Callable[[], float],
    temp_provider: Callable[[], float],
    latency_probe: Callable[[], float],
) -> SystemMetrics:
    """Take one snapshot. Provider failures degrade the reading instead of raising."""
    cpu_degraded = temp_degraded = False
    try:
        cpu = float(cpu_provider())
        if not 0.0 <= cpu <= 100.0:
            raise ValueError(f"cpu reading out of range: {cpu}")
    except Exception as exc:
        log.warning("cpu provider failed: %s", exc)
        cpu, cpu_degraded = 0.0, True
    try:
        temp = float(temp_provider())
        if not math.isfinite(temp):
            raise ValueError(f"non-finite temperature: {temp}")
    except Exception as exc:
        log.warning("temperature provider failed: %s", exc)
        temp, temp_degraded = 0.0, True
    try:
        latency = float(latency_probe())
        if math.isnan(latency) or latency < 0:
            raise ValueError(f"invalid latency: {latency}")
    except Exception as exc:
        log.warning("latency probe failed: %s", exc)
        latency = math.inf
    return SystemMetrics(
        cpu_pct=cpu,
        temp_c=temp,
        latency_ms=latency,
        sampled_at=utcnow(),
        cpu_degraded=cpu_degraded,
        temp_degraded=temp_degraded,
    )


def http_round_trip(endpoint_url: str, timeout_ms: float) -> float:
    """Time one HEAD request. Any HTTP response counts; transport errors give +inf."""
    start = time.perf_counter()
    try:
        httpx.head(endpoint_url, timeout=timeout_ms / 1000.0)
    except httpx.HTTPError:
        return math.inf
    return (time.perf_counter() - start) * 1000.0


@dataclass
class LatencyProbe:
    """Sliding-window mean of round-trip times to the online backend.

    ``rtt`` performs one measurement and returns milliseconds; the default times
    an HTTP HEAD against ``endpoint_url``. A failed measurement is +inf and
    therefore dominates the mean while it stays in the window.
    """

    endpoint_url: str
    timeout_ms: float = 1000.0
    window: int = 3
    rtt: Callable[[], float] | None = None
    _samples: deque = field(init=False, repr=False)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("probe window must be >= 1")
        self._samples = deque(maxlen=self.window)

    def measure(self) -> float:
        if self.rtt is not None:
            try:
                value = float(self.rtt())
            except Exception:
                value = math.inf
        else:
            value = http_round_trip(self.endpoint_url, self.timeout_ms)
        with self._lock:
            self._samples.append(value)
            return fmean(self._samples)

    @property
    def samples(self) -> list[float]:
        with self._lock:
            return list(self._samples)

    __call__ = measure


_probes: dict[tuple[str, float, int], LatencyProbe] = {}
_probes_lock = threading.Lock()


def probe_latency(endpoint_url: str, timeout_ms: float = 1000.0, window: int = 3) -> float:
    """Measure once against ``endpoint_url`` and return the mean of the last ``window`` probes."""
    key = (endpoint_url, float(timeout_ms), int(window))
    with _probes_lock:
        probe = _probes.get(key)
        if probe is None:
            probe = _probes[key] = LatencyProbe(endpoint_url, timeout_ms, window)
    return probe.measure()


def os_cpu_percent() -> float:
    import psutil

    return float(psutil.cpu_percent(interval=0.1))


def os_temperature() -> float:
    """Mean of all core temperature sensors psutil can see."""
    import psutil

    readings = getattr(psutil, "sensors_temperatures", lambda: {})()
    values = [t.current for entries in readings.values() for t in entries if t.current is not None]
    if not values:
        raise RuntimeError("no temperature sensors available")
    return fmean(values)
