"""Run-level summary statistics and per-sample plot data."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import fmean
from typing import Any, Iterable

from .pipeline import SampleArtifact
from .router import Mode


def _pct(num: int, den: int) -> float | None:
    return None if den == 0 else 100.0 * num / den


def _mean(values: Iterable[float]) -> float | None:
    vals = [v for v in values if math.isfinite(v)]
    return fmean(vals) if vals else None


@dataclass(frozen=True)
class SummaryReport:
    total_samples: int
    routed_count: int
    routed_pct: float | None
    online_count: int
    offline_count: int
    online_pct: float | None
    offline_pct: float | None
    asr_correct_count: int
    asr_correct_pct: float | None
    no_repair_correct_count: int
    no_repair_correct_pct: float | None
    no_repair_correct_online_pct: float | None
    no_repair_correct_offline_pct: float | None
    end_to_end_no_repair_count: int
    end_to_end_no_repair_pct: float | None
    balancer_fired_count: int
    avg_cpu_pct: float | None
    avg_latency_ms: float | None
    avg_temp_c: float | None
    avg_cpu_pct_perturbed: float | None
    avg_latency_ms_perturbed: float | None
    avg_temp_c_perturbed: float | None
    avg_inference_latency_ms: float | None
    probe_failures: int
    terminal_status_counts: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def compute_summary(artifacts: list[SampleArtifact]) -> SummaryReport:
    """Aggregate artifacts into the evaluation table.

    Averages use the raw (pre-balancer) metrics; the ``*_perturbed`` fields show
    the same averages after balancing. Failed latency probes are left out of the
    latency averages and counted in ``probe_failures``.
    """
    n = len(artifacts)
    online = [a for a in artifacts if a.decision.mode is Mode.ONLINE]
    offline = [a for a in artifacts if a.decision.mode is Mode.OFFLINE]
    routed = len(online) + len(offline)
    asr_ok = sum(a.asr_correct for a in artifacts)
    gen_ok = sum(a.no_repair_correct for a in artifacts)
    joint = sum(a.asr_correct and a.no_repair_correct for a in artifacts)
    statuses: dict[str, int] = {}
    for a in artifacts:
        statuses[a.terminal_status.value] = statuses.get(a.terminal_status.value, 0) + 1

    raw = [a.raw_metrics for a in artifacts]
    pert = [a.perturbation.perturbed for a in artifacts]
    return SummaryReport(
        total_samples=n,
        routed_count=routed,
        routed_pct=_pct(routed, n),
        online_count=len(online),
        offline_count=len(offline),
        online_pct=_pct(len(online), n),
        offline_pct=_pct(len(offline), n),
        asr_correct_count=asr_ok,
        asr_correct_pct=_pct(asr_ok, n),
        no_repair_correct_count=gen_ok,
        no_repair_correct_pct=_pct(gen_ok, n),
        no_repair_correct_online_pct=_pct(sum(a.no_repair_correct for a in online), len(online)),
        no_repair_correct_offline_pct=_pct(sum(a.no_repair_correct for a in offline), len(offline)),
        end_to_end_no_repair_count=joint,
        end_to_end_no_repair_pct=_pct(joint, n),
        balancer_fired_count=sum(a.perturbation.fired for a in artifacts),
        avg_cpu_pct=_mean(m.cpu_pct for m in raw),
        avg_latency_ms=_mean(m.latency_ms for m in raw),
        avg_temp_c=_mean(m.temp_c for m in raw),
        avg_cpu_pct_perturbed=_mean(m.cpu_pct for m in pert),
        avg_latency_ms_perturbed=_mean(m.latency_ms for m in pert),
        avg_temp_c_perturbed=_mean(m.temp_c for m in pert),
        avg_inference_latency_ms=_mean(a.inference.latency_ms for a in artifacts),
        probe_failures=sum(m.probe_failed for m in raw),
        terminal_status_counts=dict(sorted(statuses.items())),
    )


def format_summary(s: SummaryReport) -> str:
    def pct(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.1f}%"

    def num(v: float | None, unit: str) -> str:
        return "n/a" if v is None else f"{v:.1f}{unit}"

    rows = [
        ("Total samples", str(s.total_samples)),
        ("Inference routing", f"{pct(s.routed_pct)} (Online: {s.online_count}, Offline: {s.offline_count})"),
        ("Correct ASR", pct(s.asr_correct_pct)),
        (
            "Correct command generation",
            f"{pct(s.no_repair_correct_pct)} (Online: {pct(s.no_repair_correct_online_pct)}, "
            f"Offline: {pct(s.no_repair_correct_offline_pct)})",
        ),
        ("ASR + generation, no repair", pct(s.end_to_end_no_repair_pct)),
        ("Avg. CPU workload", num(s.avg_cpu_pct, "%")),
        ("Avg. latency", num(s.avg_latency_ms, " ms")),
        ("Avg. temperature", num(s.avg_temp_c, " C")),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


PLOT_FIELDS = {
    "temperature.csv": "temp_c",
    "latency.csv": "latency_ms",
    "workload.csv": "cpu_pct",
}


def emit_plot_data(artifacts: list[SampleArtifact], out_dir: str | os.PathLike) -> list[Path]:
    """Write one ``sample_index,value`` CSV per metric, rows in corpus order.

    Values are the raw metrics; a failed latency probe leaves the cell empty.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, attr in PLOT_FIELDS.items():
        path = out_dir / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample_index", "value"])
            for i, a in enumerate(artifacts):
                value = getattr(a.raw_metrics, attr)
                writer.writerow([i, repr(value) if math.isfinite(value) else ""])
        paths.append(path)
    return paths
