"""Transcriber adapters and transcript normalization for accuracy scoring.

No speech model lives here. Transcripts come either from the corpus (fixture)
or from an external executable that prints the hypothesis for an audio path.
"""

from __future__ import annotations

import enum
import logging
import re
import string
import subprocess
from dataclasses import dataclass

log = logging.getLogger(__name__)


class TranscriptSource(str, enum.Enum):
    FIXTURE = "Fixture"
    EXTERNAL_PROCESS = "ExternalProcess"


@dataclass(frozen=True)
class Transcript:
    hypothesis: str
    reference: str | None = None
    source: TranscriptSource = TranscriptSource.FIXTURE
    degraded: bool = False


class FixtureTranscriber:
    def transcribe(self, sample) -> Transcript:
        if sample.hypothesis_transcript is None:
            raise ValueError(f"sample {sample.sample_id!r} has no hypothesis transcript for fixture ASR")
        return Transcript(sample.hypothesis_transcript, sample.reference_transcript, TranscriptSource.FIXTURE)


@dataclass
class ExternalTranscriber:
    """``command [args...] <audio_path>`` must print the transcript and exit 0."""

    command: str
    args: tuple[str, ...] = ()
    timeout_ms: float = 30_000.0

    def transcribe(self, sample) -> Transcript:
        if not sample.audio_path:
            raise ValueError(f"sample {sample.sample_id!r} has no audio_path for external ASR")
        try:
            proc = subprocess.run(
                [self.command, *self.args, str(sample.audio_path)],
                capture_output=True,
                timeout=self.timeout_ms / 1000.0,
            )
        except (subprocess.TimeoutExpired, OSError) as exc:
            log.warning("transcriber failed for %s: %s", sample.sample_id, exc)
            return self._degraded(sample)
        if proc.returncode != 0:
            log.warning("transcriber exited %d for %s", proc.returncode, sample.sample_id)
            return self._degraded(sample)
        hyp = proc.stdout.decode("utf-8", errors="replace").strip()
        return Transcript(hyp, sample.reference_transcript, TranscriptSource.EXTERNAL_PROCESS)

    @staticmethod
    def _degraded(sample) -> Transcript:
        return Transcript("", sample.reference_transcript, TranscriptSource.EXTERNAL_PROCESS, degraded=True)


def transcribe(adapter, sample) -> Transcript:
    return adapter.transcribe(sample)


_PUNCT = re.compile(f"[{re.escape(string.punctuation)}]")


def normalize_text(s: str) -> str:
    # digits and number words are left alone on purpose: "5" vs "five" is an ASR error
    return " ".join(_PUNCT.sub("", s.lower()).split())


def asr_correct(hypothesis: str, reference: str | None) -> bool:
    if reference is None:
        return False
    return normalize_text(hypothesis) == normalize_text(reference)
