"""One sample through every stage: transcribe, sample metrics, balance, route,
infer, parse, validate, repair, execute, log. Failures become statuses on the
artifact rather than exceptions."""

from __future__ import annotations

import enum
import json
import logging
import os
import random
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable

from . import asr
from .command import (
    CommandVocabulary,
    DeviceCommand,
    ParseFailure,
    RepairOutcome,
    RepairStatus,
    ValidationReport,
    parse_model_output,
    repair,
    validate,
)
from .config import Config
from .corpus import CorpusSample
from .execution import DeviceRegistry, ExecStatus, ExecutionResult, execute
from .history import HistoryRecord, HistoryStore, HistoryWriteError, Outcome
from .inference import (
    Backend,
    InferenceResult,
    OfflineProcessBackend,
    OnlineBackend,
    TemplateBackend,
    build_prompt,
)
from .metrics import (
    LatencyProbe,
    PerturbationRecord,
    SystemMetrics,
    make_rng,
    os_cpu_percent,
    os_temperature,
    perturb,
    sample_system,
)
from .router import Mode, RoutingDecision, decide
from .timeutil import utcnow

log = logging.getLogger(__name__)

STAGES = ("transcribe", "metrics", "balance", "route", "infer", "parse", "validate", "repair", "execute", "log")


class TerminalStatus(str, enum.Enum):
    EXECUTED = "Executed"
    PARTIALLY_EXECUTED = "PartiallyExecuted"
    REJECTED_ALL = "RejectedAll"
    NO_COMMAND = "NoCommand"
    INFERENCE_FAILED = "InferenceFailed"


@dataclass(frozen=True)
class CommandEntry:
    parsed: DeviceCommand
    validation: ValidationReport
    repair: RepairOutcome
    execution: ExecutionResult | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "parsed": self.parsed.to_dict(),
            "validation": self.validation.to_dict(),
            "repair": self.repair.to_dict(),
            "execution": self.execution.to_dict() if self.execution else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CommandEntry":
        return cls(
            parsed=DeviceCommand.from_dict(d["parsed"]),
            validation=ValidationReport.from_dict(d["validation"]),
            repair=RepairOutcome.from_dict(d["repair"]),
            execution=ExecutionResult.from_dict(d["execution"]) if d.get("execution") else None,
        )


@dataclass(frozen=True)
class SampleArtifact:
    sample_id: str
    category: str | None
    reference: str | None
    hypothesis: str
    asr_correct: bool
    asr_degraded: bool
    raw_metrics: SystemMetrics
    perturbation: PerturbationRecord
    decision: RoutingDecision
    inference: InferenceResult
    commands: tuple[CommandEntry, ...]
    expected_commands: tuple[DeviceCommand, ...]
    no_repair_correct: bool
    terminal_status: TerminalStatus
    timings: dict[str, float]
    parse_error: str | None = None
    history_degraded: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "category": self.category,
            "transcript": {
                "reference": self.reference,
                "hypothesis": self.hypothesis,
                "asr_correct": self.asr_correct,
                "degraded": self.asr_degraded,
            },
            "metrics": {"raw": self.raw_metrics.to_dict(), "perturbation": self.perturbation.to_dict()},
            "decision": self.decision.to_dict(),
            "inference": self.inference.to_dict(),
            "parse_error": self.parse_error,
            "commands": [c.to_dict() for c in self.commands],
            "expected_commands": [c.to_dict() for c in self.expected_commands],
            "no_repair_correct": self.no_repair_correct,
            "terminal_status": self.terminal_status.value,
            "history_degraded": self.history_degraded,
            "timings": dict(self.timings),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SampleArtifact":
        t = d["transcript"]
        return cls(
            sample_id=d["sample_id"],
            category=d.get("category"),
            reference=t["reference"],
            hypothesis=t["hypothesis"],
            asr_correct=t["asr_correct"],
            asr_degraded=t.get("degraded", False),
            raw_metrics=SystemMetrics.from_dict(d["metrics"]["raw"]),
            perturbation=PerturbationRecord.from_dict(d["metrics"]["perturbation"]),
            decision=RoutingDecision.from_dict(d["decision"]),
            inference=InferenceResult.from_dict(d["inference"]),
            commands=tuple(CommandEntry.from_dict(c) for c in d["commands"]),
            expected_commands=tuple(DeviceCommand.from_dict(c) for c in d.get("expected_commands", [])),
            no_repair_correct=d["no_repair_correct"],
            terminal_status=TerminalStatus(d["terminal_status"]),
            timings=dict(d["timings"]),
            parse_error=d.get("parse_error"),
            history_degraded=d.get("history_degraded", False),
        )


_TIMESTAMP_KEYS = {"sampled_at", "last_changed_at", "executed_at"}


def canonicalize(obj: Any) -> Any:
    """Strip wall-clock content (timestamps, stage timings, inference latency) from an artifact dict."""
    if isinstance(obj, list):
        return [canonicalize(v) for v in obj]
    if not isinstance(obj, dict):
        return obj
    out = {}
    for key, value in obj.items():
        if key in _TIMESTAMP_KEYS:
            out[key] = None
        elif key == "timings":
            out[key] = {stage: 0.0 for stage in value}
        elif key == "inference" and isinstance(value, dict):
            out[key] = {**value, "latency_ms": 0.0}
        else:
            out[key] = canonicalize(value)
    return out


def artifact_json(artifact: SampleArtifact, canonical: bool = False) -> str:
    d = artifact.to_dict()
    if canonical:
        d = canonicalize(d)
    return json.dumps(d, indent=2) + "\n"


def write_artifact(artifact: SampleArtifact, out_dir: str | os.PathLike, canonical: bool = False) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{artifact.sample_id}.json"
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(artifact_json(artifact, canonical), encoding="utf-8")
    os.replace(tmp, path)
    return path


def read_artifact(path: str | os.PathLike) -> SampleArtifact:
    with open(path, encoding="utf-8") as fh:
        return SampleArtifact.from_dict(json.load(fh))


def make_backends(config: Config) -> dict[Mode, Backend]:
    if config.backends.test_mode:
        template = TemplateBackend()
        return {Mode.ONLINE: template, Mode.OFFLINE: template}
    online = OnlineBackend(
        base_url=config.backends.online.base_url,
        model_name=config.backends.online.model,
        api_key_env=config.backends.online.api_key_env,
    )
    offline = OfflineProcessBackend(
        command=config.backends.offline.command,
        args=list(config.backends.offline.args),
        model_name=config.backends.offline.model,
    )
    return {Mode.ONLINE: online, Mode.OFFLINE: offline}


def make_transcriber(config: Config):
    if config.asr.adapter == "external":
        return asr.ExternalTranscriber(config.asr.command, tuple(config.asr.args), config.asr.timeout_ms)
    return asr.FixtureTranscriber()


def _fixture_reader(sample: CorpusSample, key: str) -> Callable[[], float]:
    def read() -> float:
        if not sample.metrics or sample.metrics.get(key) is None:
            raise KeyError(f"sample {sample.sample_id} has no fixture value for {key}")
        return float(sample.metrics[key])

    return read


class _Timer:
    def __init__(self) -> None:
        self.timings = {stage: 0.0 for stage in STAGES}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += (time.perf_counter() - start) * 1000.0


def _no_repair_correct(entries: list[CommandEntry], expected: tuple[DeviceCommand, ...]) -> bool:
    if any(e.repair.status is not RepairStatus.NOT_NEEDED for e in entries):
        return False
    return tuple(e.parsed for e in entries) == tuple(expected)


def _terminal_status(entries: list[CommandEntry]) -> TerminalStatus:
    if not entries:
        return TerminalStatus.NO_COMMAND
    executed = sum(1 for e in entries if e.execution and e.execution.status is ExecStatus.EXECUTED)
    if executed == len(entries):
        return TerminalStatus.EXECUTED
    if executed:
        return TerminalStatus.PARTIALLY_EXECUTED
    return TerminalStatus.REJECTED_ALL


@dataclass
class Pipeline:
    """Holds the per-run state (history, devices, balancer RNG) shared by consecutive samples."""

    config: Config
    history: HistoryStore
    registry: DeviceRegistry
    rng: random.Random
    backends: dict[Mode, Backend] | None = None
    transcriber: Any = None
    probe: LatencyProbe | None = None
    clock: Callable[[], datetime] = field(default=utcnow)

    def __post_init__(self) -> None:
        if self.backends is None:
            self.backends = make_backends(self.config)
        if self.transcriber is None:
            self.transcriber = make_transcriber(self.config)
        if self.probe is None and self.config.metrics.provider == "real":
            p = self.config.probe
            self.probe = LatencyProbe(p.endpoint, p.timeout_ms, p.window)

    @property
    def vocab(self) -> CommandVocabulary:
        return self.config.vocab

    def sample_metrics(self, sample: CorpusSample) -> SystemMetrics:
        if self.config.metrics.provider == "real":
            return sample_system(os_cpu_percent, os_temperature, self.probe)
        return sample_system(
            _fixture_reader(sample, "cpu_pct"),
            _fixture_reader(sample, "temp_c"),
            _fixture_reader(sample, "latency_ms"),
        )

    def route(self, raw: SystemMetrics) -> tuple[PerturbationRecord, RoutingDecision]:
        """Balance then decide; the decision sees the perturbed metrics."""
        pert = perturb(raw, self.config.balancer, self.rng)
        return pert, decide(pert.perturbed, self.config.thresholds)

    def _log_execution(self, sample_id: str, cmd: DeviceCommand, outcome: Outcome) -> bool:
        now = self.clock()
        if self.history.records and now < self.history.records[-1].executed_at:
            now = self.history.records[-1].executed_at
        record = HistoryRecord(cmd.action, cmd.device, cmd.index, now, outcome, sample_id)
        try:
            self.history.append(record)
        except HistoryWriteError as exc:
            log.error("%s: %s", sample_id, exc)
            return False
        return True

    def run_sample(self, sample: CorpusSample) -> SampleArtifact:
        timer = _Timer()

        with timer.stage("transcribe"):
            transcript = asr.transcribe(self.transcriber, sample)
        with timer.stage("metrics"):
            raw = self.sample_metrics(sample)
        with timer.stage("balance"):
            pert = perturb(raw, self.config.balancer, self.rng)
        with timer.stage("route"):
            decision = decide(pert.perturbed, self.config.thresholds)

        backend = self.backends[decision.mode]
        with timer.stage("infer"):
            try:
                bundle = build_prompt(transcript.hypothesis, self.vocab)
            except ValueError as exc:
                result = InferenceResult(
                    backend.backend_id, "", 0.0, backend.model_name, False, str(exc)
                )
            else:
                result = backend.infer(bundle, self.config.backends.timeout_ms)

        entries: list[CommandEntry] = []
        parse_error = None
        history_ok = True
        if result.succeeded:
            with timer.stage("parse"):
                try:
                    parsed = parse_model_output(result.raw_output)
                except ParseFailure as exc:
                    parse_error, parsed = str(exc), []
            with timer.stage("validate"):
                reports = [validate(cmd, self.vocab) for cmd in parsed]
            with timer.stage("repair"):
                outcomes = [repair(cmd, rep, self.history, self.vocab) for cmd, rep in zip(parsed, reports)]
            with timer.stage("execute"):
                executions = [
                    execute(self.registry, out.command) if out.executable else None for out in outcomes
                ]
            with timer.stage("log"):
                for ex in executions:
                    if ex is None or ex.status is ExecStatus.REJECTED:
                        continue
                    outcome = Outcome.SUCCESS if ex.status is ExecStatus.EXECUTED else Outcome.FAILURE
                    history_ok &= self._log_execution(sample.sample_id, ex.command, outcome)
            entries = [CommandEntry(*parts) for parts in zip(parsed, reports, outcomes, executions)]

        if not result.succeeded:
            status = TerminalStatus.INFERENCE_FAILED
        else:
            status = _terminal_status(entries)

        return SampleArtifact(
            sample_id=sample.sample_id,
            category=sample.category.value if sample.category else None,
            reference=transcript.reference,
            hypothesis=transcript.hypothesis,
            asr_correct=asr.asr_correct(transcript.hypothesis, transcript.reference),
            asr_degraded=transcript.degraded,
            raw_metrics=raw,
            perturbation=pert,
            decision=decision,
            inference=result,
            commands=tuple(entries),
            expected_commands=tuple(sample.expected_commands),
            no_repair_correct=result.succeeded
            and parse_error is None
            and _no_repair_correct(entries, sample.expected_commands),
            terminal_status=status,
            timings=timer.timings,
            parse_error=parse_error,
            history_degraded=not history_ok,
        )


def run_sample(
    sample: CorpusSample,
    config: Config,
    history: HistoryStore,
    registry: DeviceRegistry,
    rng: random.Random,
) -> SampleArtifact:
    return Pipeline(config, history, registry, rng).run_sample(sample)


def new_pipeline(config: Config, history: HistoryStore | None = None) -> Pipeline:
    return Pipeline(
        config=config,
        history=history if history is not None else HistoryStore(),
        registry=DeviceRegistry.from_vocab(config.vocab, config.devices.driver),
        rng=make_rng(config.balancer),
    )
