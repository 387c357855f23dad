"""Command-line entry points: run, replay, report, plot."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import asr
from .config import Config, ConfigError, load_config
from .corpus import Category, CorpusSample, load_corpus
from .execution import DeviceRegistry
from .history import HistoryStore
from .history import load as load_history
from .inference import build_prompt
from .metrics import make_rng
from .pipeline import Pipeline, SampleArtifact, artifact_json, canonicalize, read_artifact, write_artifact
from .report import compute_summary, emit_plot_data, format_summary

log = logging.getLogger("voiceroute")

EXIT_OK, EXIT_USAGE, EXIT_ENV = 0, 1, 2


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _new_run_id(out_root: Path) -> str:
    base = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    run_id, n = base, 1
    while (out_root / run_id).exists():
        n += 1
        run_id = f"{base}-{n}"
    return run_id


def replay_corpus(
    corpus_path: str | os.PathLike | None,
    config: Config,
    out_root: str | os.PathLike = "runs",
    run_id: str | None = None,
    canonical: bool = False,
) -> Path:
    """Replay every sample in manifest order and write artifacts, summary and plot CSVs.

    Each replay starts from a fresh history file and fresh device states inside
    the run directory, so a run depends only on the corpus, config and seed.
    """
    samples = load_corpus(corpus_path)
    out_root = Path(out_root)
    run_dir = out_root / (run_id or _new_run_id(out_root))
    art_dir = run_dir / "artifacts"
    art_dir.mkdir(parents=True, exist_ok=True)
    for stale in art_dir.glob("*.json"):
        stale.unlink()

    history_path = run_dir / "history.jsonl"
    if history_path.exists():
        history_path.unlink()
    pipeline = Pipeline(
        config=config,
        history=load_history(history_path),
        registry=DeviceRegistry.from_vocab(config.vocab, config.devices.driver),
        rng=make_rng(config.balancer),
    )

    artifacts: list[SampleArtifact] = []
    for sample in samples:
        artifact = pipeline.run_sample(sample)
        write_artifact(artifact, art_dir, canonical=canonical)
        if canonical:
            artifact = SampleArtifact.from_dict(canonicalize(artifact.to_dict()))
        artifacts.append(artifact)
        log.info("%s: %s via %s", sample.sample_id, artifact.terminal_status.value, artifact.decision.mode.value)

    _json_dump(
        {
            "seed": config.balancer.seed,
            "corpus": str(corpus_path) if corpus_path else "bundled",
            "canonical": canonical,
            "sample_ids": [s.sample_id for s in samples],
        },
        run_dir / "run.json",
    )
    _json_dump(compute_summary(artifacts).to_dict(), run_dir / "summary.json")
    emit_plot_data(artifacts, run_dir / "plots")
    return run_dir


def load_run_artifacts(run_dir: str | os.PathLike) -> list[SampleArtifact]:
    """Artifacts of a run directory in corpus order (falls back to file-name order)."""
    run_dir = Path(run_dir)
    art_dir = run_dir / "artifacts"
    if not art_dir.is_dir():
        raise FileNotFoundError(f"{art_dir} does not exist")
    manifest = run_dir / "run.json"
    if manifest.exists():
        ids = json.loads(manifest.read_text(encoding="utf-8"))["sample_ids"]
        return [read_artifact(art_dir / f"{sid}.json") for sid in ids]
    return [read_artifact(p) for p in sorted(art_dir.glob("*.json"))]


def run_once(
    config: Config,
    text: str | None = None,
    audio: str | None = None,
    metrics: tuple[float, float, float] | None = None,
    sample_id: str = "cli",
) -> SampleArtifact:
    if (text is None) == (audio is None):
        raise ConfigError("give exactly one of --text or --audio")
    if text is not None:
        build_prompt(text, config.vocab)  # empty text fails here, before any side effects
        transcriber = asr.FixtureTranscriber()
    else:
        if config.asr.adapter != "external":
            raise ConfigError("--audio needs asr.adapter = 'external' in the config")
        transcriber = None
    if metrics is None:
        metrics = (0.0, 0.0, 0.0)
    sample = CorpusSample(
        sample_id=sample_id,
        reference_transcript=text if text is not None else None,
        hypothesis_transcript=text,
        audio_path=audio,
        category=Category.COMPLETE,
        metrics=dict(zip(("cpu_pct", "temp_c", "latency_ms"), metrics)),
    )
    pipeline = Pipeline(
        config=config,
        history=load_history(config.history.path) if config.history.path else HistoryStore(),
        registry=DeviceRegistry.from_vocab(config.vocab, config.devices.driver),
        rng=make_rng(config.balancer),
        transcriber=transcriber,
    )
    return pipeline.run_sample(sample)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="balancer seed (overrides config)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output root for runs (default: runs)")
    common.add_argument(
        "--canonical", action="store_true", default=argparse.SUPPRESS,
        help="strip timestamps and timings from artifacts for byte-level comparison",
    )
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = _Parser(prog="voiceroute", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run one command end to end and print its artifact")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text", help="command text (bypasses ASR)")
    src.add_argument("--audio", help="audio file for the external transcriber")
    p.add_argument("--metrics", nargs=3, type=float, metavar=("CPU", "TEMP", "LATENCY"),
                   help="fixture metric readings (default: 0 0 0)")
    p.add_argument("--sample-id", default="cli")

    p = sub.add_parser("replay", parents=[common], help="replay a corpus manifest")
    p.add_argument("corpus", nargs="?", help="manifest path (default: bundled 80-sample corpus)")
    p.add_argument("--run-id", help="run directory name (default: UTC timestamp)")

    p = sub.add_parser("report", parents=[common], help="recompute the summary of a run directory")
    p.add_argument("run_dir")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")

    p = sub.add_parser("plot", parents=[common], help="write per-sample plot CSVs for a run directory")
    p.add_argument("run_dir")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    opts = vars(args)
    logging.basicConfig(
        level=logging.INFO if opts.get("verbose") else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    canonical = opts.get("canonical", False)
    try:
        config = load_config(opts.get("config"))
        if "seed" in opts:
            config = config.with_seed(opts["seed"])

        if args.command == "run":
            artifact = run_once(config, args.text, args.audio, args.metrics, args.sample_id)
            sys.stdout.write(artifact_json(artifact, canonical))
        elif args.command == "replay":
            run_dir = replay_corpus(args.corpus, config, opts.get("out", "runs"), args.run_id, canonical)
            print(f"run directory: {run_dir}")
            print(format_summary(compute_summary(load_run_artifacts(run_dir))))
        elif args.command == "report":
            report = compute_summary(load_run_artifacts(args.run_dir))
            print(json.dumps(report.to_dict(), indent=2) if args.json else format_summary(report))
        elif args.command == "plot":
            out = Path(opts["out"]) if "out" in opts else Path(args.run_dir) / "plots"
            for path in emit_plot_data(load_run_artifacts(args.run_dir), out):
                print(path)
    except (ConfigError, ValueError) as exc:
        print(f"voiceroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"voiceroute: I/O error: {exc}", file=sys.stderr)
        return EXIT_ENV
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
