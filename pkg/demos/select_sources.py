"""Rank 5 clean and 5 noise-corrupted synthetic digit sources against a target.

    python demos/select_sources.py --sigma 50 --n 1000
"""
import argparse

from disckit.disc import rank_sources
from disckit.experiments import SELECTION_CFG, selection_task

parser = argparse.ArgumentParser()
parser.add_argument("--sigma", type=float, default=50.0)
parser.add_argument("--n", type=int, default=1000)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

target, sources, clean = selection_task(args.seed, 0, args.sigma, args.n)
for measure in ("sdisc", "dh"):
    r = rank_sources(target, sources, measure, cfg=SELECTION_CFG, clean=clean)
    tags = ["C" if clean[i] else "n" for i in r.order]
    print(f"{measure:5s} order {' '.join(tags)}   clean in top 5: {r.clean_in_top}")
    print("      values " + " ".join(f"{r.values[i]:.3f}" for i in r.order))
