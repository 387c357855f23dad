"""Regenerate the bundled 80-sample corpus manifest.

Hypothesis transcripts carry the ASR error patterns seen on small on-device
models: digits for number words, homophones (too/two, of/off, to/two), dropped
words. Fixture metrics are drawn once from a fixed seed and sit below every
routing threshold, so with these readings an offline decision only happens
when the balancer fires.

    python scripts/build_corpus.py [--out src/voiceroute/data/corpus.json]
"""

import argparse
import json
import random
from pathlib import Path

ON, OFF = "turn_on", "turn_off"

# (category, reference, hypothesis or None for an exact transcript, expected commands)
SAMPLES = [
    # complete
    ("complete", "turn on light one", None, [(ON, "light", 1)]),
    ("complete", "turn off light one", None, [(OFF, "light", 1)]),
    ("complete", "turn on light two", None, [(ON, "light", 2)]),
    ("complete", "turn off light two", "turn off light too", [(OFF, "light", 2)]),
    ("complete", "turn on speaker one", None, [(ON, "speaker", 1)]),
    ("complete", "turn off speaker one", None, [(OFF, "speaker", 1)]),
    ("complete", "switch on light one", "switch on light 1", [(ON, "light", 1)]),
    ("complete", "switch off light two", None, [(OFF, "light", 2)]),
    ("complete", "switch on speaker one", None, [(ON, "speaker", 1)]),
    ("complete", "switch off speaker one", "switch of speaker one", [(OFF, "speaker", 1)]),
    ("complete", "please turn on light two", None, [(ON, "light", 2)]),
    ("complete", "please turn off light one", "please turn of light one", [(OFF, "light", 1)]),
    ("complete", "turn on light one now", None, [(ON, "light", 1)]),
    ("complete", "could you turn off light two", "could you turn off light to", [(OFF, "light", 2)]),
    ("complete", "turn on the speaker one", None, [(ON, "speaker", 1)]),
    ("complete", "turn off the light one", "turn off the light 1", [(OFF, "light", 1)]),
    ("complete", "turn on the light two", None, [(ON, "light", 2)]),
    ("complete", "switch on the light one", None, [(ON, "light", 1)]),
    ("complete", "switch off the light two", "switch off the light two", [(OFF, "light", 2)]),
    ("complete", "turn off the speaker one", "turn off the speaker", [(OFF, "speaker", 1)]),
    ("complete", "hey turn on light two", "hey turn on light 2", [(ON, "light", 2)]),
    ("complete", "turn on light one please", None, [(ON, "light", 1)]),
    ("complete", "turn off light two please", None, [(OFF, "light", 2)]),
    ("complete", "switch on light two", "which on light two", [(ON, "light", 2)]),
    # index variants: missing, out of range, or phrased ordinally
    ("index_variant", "turn on the light", None, [(ON, "light", None)]),
    ("index_variant", "turn off the light", None, [(OFF, "light", None)]),
    ("index_variant", "turn on the speaker", None, [(ON, "speaker", None)]),
    ("index_variant", "turn off the lights", None, [(OFF, "light", None)]),
    ("index_variant", "switch on the light", "switch on the lite", [(ON, "light", None)]),
    ("index_variant", "turn on the second light", None, [(ON, "light", 2)]),
    ("index_variant", "turn off the first light", None, [(OFF, "light", 1)]),
    ("index_variant", "turn on light number two", None, [(ON, "light", 2)]),
    ("index_variant", "turn on light five", "turn on light 5", []),
    ("index_variant", "turn off light three", None, []),
    ("index_variant", "turn on speaker two", "turn on speaker too", []),
    ("index_variant", "turn on light 2", None, [(ON, "light", 2)]),
    ("index_variant", "turn off light 1", None, [(OFF, "light", 1)]),
    ("index_variant", "switch off the light", "switch off the light", [(OFF, "light", None)]),
    ("index_variant", "turn on light ten", None, []),
    ("index_variant", "turn off speaker", None, [(OFF, "speaker", None)]),
    # compound commands
    ("compound", "turn on light one and turn off light two", None, [(ON, "light", 1), (OFF, "light", 2)]),
    ("compound", "turn off light one and turn on light two", None, [(OFF, "light", 1), (ON, "light", 2)]),
    ("compound", "turn on light one and turn on speaker one", None, [(ON, "light", 1), (ON, "speaker", 1)]),
    ("compound", "turn off speaker one and turn off light one", "turn off speaker one and turn of light one",
     [(OFF, "speaker", 1), (OFF, "light", 1)]),
    ("compound", "turn on light two and turn off speaker one", "turn on light to and turn off speaker one",
     [(ON, "light", 2), (OFF, "speaker", 1)]),
    ("compound", "switch on light one and switch on light two", None, [(ON, "light", 1), (ON, "light", 2)]),
    ("compound", "turn on light one and light two", None, [(ON, "light", 1), (ON, "light", 2)]),
    ("compound", "turn off the light and turn on the speaker", None, [(OFF, "light", None), (ON, "speaker", None)]),
    ("compound", "turn on light one and turn on the oven", None, [(ON, "light", 1)]),
    ("compound", "turn off light two and switch on speaker one", "turn off light 2 and switch on speaker 1",
     [(OFF, "light", 2), (ON, "speaker", 1)]),
    ("compound", "turn on speaker one and turn off light two", None, [(ON, "speaker", 1), (OFF, "light", 2)]),
    ("compound", "turn off light one and turn off light two", "turn off light one and turn off light too",
     [(OFF, "light", 1), (OFF, "light", 2)]),
    ("compound", "turn on light two and turn on light one", None, [(ON, "light", 2), (ON, "light", 1)]),
    ("compound", "switch off speaker one and switch off light two", None, [(OFF, "speaker", 1), (OFF, "light", 2)]),
    # devices that do not exist on the testbed
    ("unsupported_device", "turn on the oven", None, []),
    ("unsupported_device", "turn off the fan", None, []),
    ("unsupported_device", "turn on the television", "turn on the tele vision", []),
    ("unsupported_device", "switch on the heater two", None, []),
    ("unsupported_device", "turn off the air conditioner", None, []),
    ("unsupported_device", "turn on the coffee machine", None, []),
    ("unsupported_device", "turn off the dishwasher one", "turn off the dishwasher 1", []),
    ("unsupported_device", "switch off the garage door", None, []),
    ("unsupported_device", "turn on the fan one", "turn on the fan 1", []),
    ("unsupported_device", "turn on the lamp", None, []),
    ("unsupported_device", "turn off the radio", None, []),
    ("unsupported_device", "switch on the printer", None, []),
    # ambiguous or irrelevant
    ("irrelevant", "what is the weather today", None, []),
    ("irrelevant", "tell me a joke", None, []),
    ("irrelevant", "hello there", None, []),
    ("irrelevant", "play some music", None, []),
    ("irrelevant", "what time is it", None, []),
    ("irrelevant", "set a timer for five minutes", "set a timer for 5 minutes", []),
    ("irrelevant", "how are you", None, []),
    ("irrelevant", "make it brighter", None, []),
    ("irrelevant", "turn it up", None, []),
    ("irrelevant", "good night", None, []),
    ("irrelevant", "open the window", None, []),
    ("irrelevant", "dim the light", None, []),
    ("irrelevant", "call mom", "call mum", []),
    ("irrelevant", "remind me to buy milk", "remind me to by milk", []),
]

METRIC_SEED = 80


def build(rng: random.Random) -> dict:
    samples = []
    for i, (category, ref, hyp, expected) in enumerate(SAMPLES, 1):
        samples.append(
            {
                "sample_id": f"s{i:03d}",
                "category": category,
                "reference_transcript": ref,
                "hypothesis_transcript": ref if hyp is None else hyp,
                "audio_path": None,
                "expected_commands": [{"action": a, "device": d, "index": idx} for a, d, idx in expected],
                "metrics": {
                    "cpu_pct": round(rng.uniform(22.0, 55.0), 1),
                    "temp_c": round(rng.uniform(42.0, 49.5), 1),
                    "latency_ms": round(rng.uniform(55.0, 125.0), 1),
                },
            }
        )
    return {"samples": samples}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=Path(__file__).resolve().parent.parent / "src/voiceroute/data/corpus.json")
    args = ap.parse_args()
    assert len(SAMPLES) == 80, len(SAMPLES)
    manifest = build(random.Random(METRIC_SEED))
    Path(args.out).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(manifest['samples'])} samples to {args.out}")


if __name__ == "__main__":
    main()
