"""BDM sanity controls on a trained SFM: shuffled weights, (q, b) grid agreement, random labels.

    python3 scripts/bdm_controls.py
"""
import argparse
import itertools

import numpy as np

from groklab.complexity import bdm, realify
from groklab.config import RunConfig
from groklab.experiments import run_training
from groklab.interventions import shuffle_weights
from groklab.metrics import spearman
from groklab.sfm import train
from groklab.tasks import enumerate_pairs, random_label_dataset, split_dataset

GRID = [(q, b) for q in (2, 4, 8) for b in (2, 4, 8)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shuffles", type=int, default=20)
    ap.add_argument("--label-seeds", type=int, default=5)
    args = ap.parse_args()
    cfg = RunConfig(metrics=["bdm"], metrics_every=25, bdm_grid=GRID)
    run = run_training(cfg, seed=0)
    W = run.trace.final_weights

    base = bdm(realify(W), 4, 4).value
    shuf = np.array([bdm(realify(shuffle_weights(W, s)), 4, 4).value for s in range(args.shuffles)])
    print(f"BDM trained {base:.4f}; shuffled mean {shuf.mean():.4f}; "
          f"smaller {int(np.sum(base < shuf))}, tied {int(np.sum(base == shuf))}, "
          f"larger {int(np.sum(base > shuf))}")

    cols = [f"bdm_q{q}_b{b}" for q, b in GRID]
    series = {c: [r[c] for r in run.metrics] for c in cols}
    rhos = [spearman(series[a], series[b]) for a, b in itertools.combinations(cols, 2)]
    print(f"trajectory Spearman over {len(rhos)} grid pairs: min {min(rhos):.3f}, "
          f"median {np.median(rhos):.3f}")

    pairs = enumerate_pairs(cfg.task_spec())
    for seed in range(args.label_seeds):
        split = split_dataset(random_label_dataset(pairs, seed, cfg.p), cfg.frac, cfg.split_seed)
        trace = train(cfg.sfm_config(seed), split)
        print(f"random labels seed {seed}: peak test accuracy {trace.column('test_acc').max():.4f} "
              f"(chance {1 / cfg.p:.4f})")


if __name__ == "__main__":
    main()
