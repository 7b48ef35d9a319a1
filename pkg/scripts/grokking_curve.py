"""Train the p=29 addition SFM and write its trace, weights, metrics and plot.

    python3 scripts/grokking_curve.py --out runs/grok
"""
import argparse

from groklab.config import RunConfig
from groklab.experiments import crossover_step, run_training, write_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/grok")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=int, default=29)
    args = ap.parse_args()
    cfg = RunConfig(p=args.p, metrics=["gini", "ipr", "bdm", "stable_rank"], metrics_every=25)
    run = run_training(cfg, args.seed)
    paths = write_run(cfg, run, args.out)
    tr = run.trace
    print(f"train >= 0.99 at step {tr.first_step('train_acc', 0.99)}")
    print(f"test  >= 0.99 at step {crossover_step(tr)}")
    print(f"final support size {tr.rows[-1].support_size}")
    for name, path in paths.items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
