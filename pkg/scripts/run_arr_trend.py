#!/usr/bin/env python3
"""ARR per driving-volume bucket, averaged over seeds.

Selects a lexicon for every word straight from the data (no G2P) and reports
how often each word's held-out occurrences are matched, bucketed by how many
training segments the word had.

    python scripts/run_arr_trend.py --seeds 10
"""

import argparse
import pathlib
import sys
import time

import numpy as np

from cslex.config import load_config
from cslex.experiments import arr_trend
from cslex.metrics import parse_buckets

DEFAULT_CONFIG = pathlib.Path(__file__).resolve().parents[1] / "configs" / "experiment.ini"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(DEFAULT_CONFIG))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    args = ap.parse_args(argv)

    cfg = load_config(args.config, args.set)
    labels = [f"[{lo},{'inf' if hi == float('inf') else int(hi)})" for lo, hi in parse_buckets(cfg.score.buckets)]
    print("seed\t" + "\t".join(labels) + "\tsec")
    rows = []
    for seed in range(args.seeds):
        t = time.perf_counter()
        row = arr_trend(cfg, seed)
        rows.append([np.nan if v is None else v for v in row])
        print(f"{seed}\t" + "\t".join(f"{v:.4f}" for v in rows[-1]) + f"\t{time.perf_counter() - t:.1f}", flush=True)
    means = np.nanmean(rows, axis=0)
    print("mean\t" + "\t".join(f"{v:.4f}" for v in means))
    monotone = bool(np.all(np.diff(means) >= 0))
    print(f"nondecreasing across buckets: {monotone}")
    return 0 if monotone else 1


if __name__ == "__main__":
    sys.exit(main())
