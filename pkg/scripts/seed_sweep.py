"""Offline-count distribution of the load balancer across seeds.

Routes every bundled sample under each seed (no inference, no execution) and
prints how many went offline, plus the share of seeds inside a +-15% band
around an even split.

    python scripts/seed_sweep.py [--seeds 200] [--corpus path] [--config path]
"""

import argparse
import statistics
from collections import Counter

from voiceroute.config import load_config
from voiceroute.corpus import load_corpus
from voiceroute.pipeline import new_pipeline
from voiceroute.router import Mode


def offline_count(config, samples, seed):
    pipeline = new_pipeline(config.with_seed(seed))
    return sum(pipeline.route(pipeline.sample_metrics(s))[1].mode is Mode.OFFLINE for s in samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--corpus")
    ap.add_argument("--config")
    args = ap.parse_args(argv)

    config = load_config(args.config)
    samples = load_corpus(args.corpus)
    n = len(samples)
    counts = [offline_count(config, samples, seed) for seed in range(args.seeds)]
    lo, hi = round(n * 0.35), round(n * 0.65)

    print(f"samples={n} seeds={args.seeds}")
    print(f"mean offline fraction {statistics.mean(counts) / n:.4f}")
    print(f"offline count min={min(counts)} max={max(counts)} stdev={statistics.pstdev(counts):.2f}")
    print(f"seeds with offline count in [{lo}, {hi}]: {sum(lo <= c <= hi for c in counts)}/{len(counts)}")
    hist = Counter(counts)
    for c in range(min(counts), max(counts) + 1):
        print(f"{c:4d} {'#' * hist[c]}")


if __name__ == "__main__":
    main()
