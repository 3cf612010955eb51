#!/usr/bin/env python3
"""Paired-seed comparison: internal assistance on/off, and APE vs PCN+APE.

For each seed one corpus is generated and scored four ways by pronunciation
recovery (the hidden pronunciation is among a word's selected entries):
scarce-set words with and without G2P assistance, and all material words
with plain APE and with the PCN+APE hybrid.

    python scripts/run_ia_experiment.py --seeds 10
"""

import argparse
import dataclasses
import json
import pathlib
import sys
import time

import numpy as np

from cslex.config import load_config
from cslex.experiments import ia_comparison

DEFAULT_CONFIG = pathlib.Path(__file__).resolve().parents[1] / "configs" / "experiment.ini"
COLUMNS = ("scarce_without_ia", "scarce_with_ia", "material_ape", "material_hybrid")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(DEFAULT_CONFIG))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    ap.add_argument("--json", help="also write the per-seed rows here")
    args = ap.parse_args(argv)

    cfg = load_config(args.config, args.set)
    print("seed\t|A|\t|B|\t" + "\t".join(COLUMNS) + "\tsec")
    rows = []
    for seed in range(args.seeds):
        t = time.perf_counter()
        r = ia_comparison(cfg, seed)
        rows.append(r)
        vals = "\t".join(f"{getattr(r, c):.4f}" for c in COLUMNS)
        print(f"{seed}\t{r.n_sufficient}\t{r.n_scarce}\t{vals}\t{time.perf_counter() - t:.1f}", flush=True)
    means = {c: float(np.mean([getattr(r, c) for r in rows])) for c in COLUMNS}
    print("mean\t\t\t" + "\t".join(f"{means[c]:.4f}" for c in COLUMNS))
    ia_ok = means["scarce_with_ia"] >= means["scarce_without_ia"]
    hybrid_ok = means["material_hybrid"] >= means["material_ape"]
    print(f"IA >= no IA: {ia_ok}; PCN+APE >= APE: {hybrid_ok}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"rows": [dataclasses.asdict(r) for r in rows], "means": means}, fh, indent=2)
    return 0 if ia_ok and hybrid_ok else 1


if __name__ == "__main__":
    sys.exit(main())
