"""Inference backends: chat-completion HTTP client, local process, deterministic template."""

from __future__ import annotations

import enum
import json
import os
import re
import subprocess
import time
from dataclasses import dataclass, field
from typing import Any

import httpx

from .command import NUMBER_WORDS, CommandVocabulary


class BackendId(str, enum.Enum):
    ONLINE = "Online"
    OFFLINE = "Offline"
    TEMPLATE = "Template"


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    vocab: CommandVocabulary

    def as_single_text(self) -> str:
        return f"{self.system_text}\n\nUser command: {self.user_text}\n"


@dataclass(frozen=True)
class InferenceResult:
    backend_id: BackendId
    raw_output: str
    latency_ms: float
    model_name: str
    succeeded: bool = True
    failure_reason: str | None = None

    def __post_init__(self) -> None:
        if not self.succeeded and (self.raw_output or not self.failure_reason):
            raise ValueError("failed inference must have empty output and a failure reason")

    def to_dict(self) -> dict[str, Any]:
        return {
            "backend_id": self.backend_id.value,
            "raw_output": self.raw_output,
            "latency_ms": self.latency_ms,
            "model_name": self.model_name,
            "succeeded": self.succeeded,
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InferenceResult":
        return cls(
            backend_id=BackendId(d["backend_id"]),
            raw_output=d["raw_output"],
            latency_ms=d["latency_ms"],
            model_name=d["model_name"],
            succeeded=d["succeeded"],
            failure_reason=d.get("failure_reason"),
        )


def build_prompt(transcript: str, vocab: CommandVocabulary) -> PromptBundle:
    if not transcript or not transcript.strip():
        raise ValueError("transcript must be non-empty to build a prompt")
    devices = ", ".join(f"{name} (instances 1-{count})" for name, count in vocab.devices.items())
    system_text = (
        "You convert a spoken smart-home request into device commands.\n"
        f"Allowed actions: {', '.join(vocab.actions)}.\n"
        f"Allowed devices: {devices}.\n"
        'Reply with only a JSON array of objects with keys "action", "device" and "index". '
        '"index" is the 1-based device instance number, or null if the request does not say which one. '
        "Use only the allowed actions and devices. "
        "If the request contains no device command, reply with []."
    )
    return PromptBundle(system_text=system_text, user_text=transcript, vocab=vocab)


# --- template backend -------------------------------------------------------

ACTION_PHRASES = {
    ("turn", "on"): "turn_on",
    ("switch", "on"): "turn_on",
    ("turn", "off"): "turn_off",
    ("switch", "off"): "turn_off",
}
_SKIP_WORDS = {"the", "a", "an", "my", "this", "that", "all"}


def _device_at(tokens: list[str], i: int, vocab: CommandVocabulary) -> tuple[str, int] | None:
    """Return (device, tokens consumed) if a vocabulary device starts at tokens[i]."""
    for device in vocab.devices:
        parts = device.split("_")
        window = tokens[i : i + len(parts)]
        if len(window) < len(parts):
            continue
        last = window[-1]
        if window[:-1] == parts[:-1] and last in (parts[-1], parts[-1] + "s"):
            return device, len(parts)
    return None


def _index_token(tok: str | None) -> int | None:
    if tok is None:
        return None
    if tok.isdigit():
        return int(tok)
    return NUMBER_WORDS.get(tok)


def _segment_command(tokens: list[str], vocab: CommandVocabulary) -> dict[str, Any] | None:
    action = None
    for i in range(len(tokens) - 1):
        action = ACTION_PHRASES.get((tokens[i], tokens[i + 1]))
        if action:
            rest = tokens[i + 2 :]
            break
    if action is None:
        return None

    device, index = None, None
    for j in range(len(rest)):
        hit = _device_at(rest, j, vocab)
        if hit:
            device, width = hit
            nxt = j + width
            index = _index_token(rest[nxt] if nxt < len(rest) else None)
            break
    if device is None:
        # name whatever follows the action so validation can report it as unsupported
        words = [t for t in rest if t not in _SKIP_WORDS and _index_token(t) is None]
        if words:
            device = words[0]
            pos = rest.index(device) + 1
            index = _index_token(rest[pos] if pos < len(rest) else None)
    return {"action": action, "device": device, "index": index}


def template_infer(transcript: str, vocab: CommandVocabulary) -> str:
    """Keyword-rule stand-in for a language model. Always returns a JSON array string."""
    text = transcript.lower()
    commands = []
    for segment in re.split(r"\band\b", text):
        tokens = re.findall(r"[a-z0-9]+", segment)
        cmd = _segment_command(tokens, vocab)
        if cmd is not None:
            commands.append(cmd)
    return json.dumps(commands)


# --- backends ---------------------------------------------------------------


class Backend:
    backend_id: BackendId
    model_name: str

    def infer(self, bundle: PromptBundle, timeout_ms: float) -> InferenceResult:
        raise NotImplementedError

    def _fail(self, reason: str, started: float) -> InferenceResult:
        return InferenceResult(
            self.backend_id, "", (time.perf_counter() - started) * 1000.0, self.model_name, False, reason
        )

    def _ok(self, raw: str, started: float) -> InferenceResult:
        return InferenceResult(self.backend_id, raw, (time.perf_counter() - started) * 1000.0, self.model_name)


@dataclass
class TemplateBackend(Backend):
    model_name: str = "template-rules"
    backend_id: BackendId = field(default=BackendId.TEMPLATE, init=False)

    def infer(self, bundle: PromptBundle, timeout_ms: float) -> InferenceResult:
        started = time.perf_counter()
        return self._ok(template_infer(bundle.user_text, bundle.vocab), started)


@dataclass
class OnlineBackend(Backend):
    """Client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    base_url: str
    model_name: str = "gpt-3.5-turbo"
    api_key_env: str = "OPENAI_API_KEY"
    backend_id: BackendId = field(default=BackendId.ONLINE, init=False)

    def payload(self, bundle: PromptBundle) -> dict[str, Any]:
        return {
            "model": self.model_name,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
        }

    def infer(self, bundle: PromptBundle, timeout_ms: float) -> InferenceResult:
        started = time.perf_counter()
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env) if self.api_key_env else None
        if key:
            headers["Authorization"] = f"Bearer {key}"
        url = self.base_url.rstrip("/") + "/chat/completions"
        try:
            resp = httpx.post(url, json=self.payload(bundle), headers=headers, timeout=timeout_ms / 1000.0)
        except httpx.TimeoutException:
            return self._fail(f"timeout after {timeout_ms:g} ms", started)
        except httpx.HTTPError as exc:
            return self._fail(f"request failed: {exc}", started)
        if not resp.is_success:
            return self._fail(f"HTTP {resp.status_code}", started)
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            return self._fail("malformed chat-completion response", started)
        if not isinstance(content, str) or not content:
            return self._fail("empty completion", started)
        return self._ok(content, started)


@dataclass
class OfflineProcessBackend(Backend):
    """Runs a local model as a child process: prompt on stdin, completion on stdout."""

    command: str
    args: list[str] = field(default_factory=list)
    model_name: str = "local-process"
    backend_id: BackendId = field(default=BackendId.OFFLINE, init=False)

    def infer(self, bundle: PromptBundle, timeout_ms: float) -> InferenceResult:
        started = time.perf_counter()
        try:
            proc = subprocess.run(
                [self.command, *self.args],
                input=bundle.as_single_text().encode("utf-8"),
                capture_output=True,
                timeout=timeout_ms / 1000.0,
            )
        except subprocess.TimeoutExpired:
            return self._fail(f"process timed out after {timeout_ms:g} ms", started)
        except OSError as exc:
            return self._fail(f"process could not start: {exc}", started)
        if proc.returncode != 0:
            return self._fail(f"process exited {proc.returncode}", started)
        out = proc.stdout.decode("utf-8", errors="replace")
        if not out.strip():
            return self._fail("process produced no output", started)
        return self._ok(out, started)


def infer(backend: Backend, bundle: PromptBundle, timeout_ms: float) -> InferenceResult:
    return backend.infer(bundle, timeout_ms)
