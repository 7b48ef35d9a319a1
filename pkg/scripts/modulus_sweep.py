"""Crossover step against modulus, with the Lambert-W predictor fitted on one prime.

    python3 scripts/modulus_sweep.py --primes 13,29,53 --seeds 0,1,2,3,4
"""
import argparse
from pathlib import Path

from groklab.config import RunConfig
from groklab.experiments import sweep_csv, sweep_primes, sweep_summary


def ints(text):
    return [int(x) for x in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--primes", type=ints, default=[13, 29, 53])
    ap.add_argument("--seeds", type=ints, default=[0, 1, 2, 3, 4])
    ap.add_argument("--fit-prime", type=int, default=None)
    ap.add_argument("--max-steps", type=int, default=8000)
    ap.add_argument("--out", default="runs/sweep.csv")
    args = ap.parse_args()
    cfg = RunConfig(seeds=args.seeds, max_steps=args.max_steps)
    rows, eps, rho = sweep_primes(cfg, args.primes, fit_prime=args.fit_prime)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(sweep_csv(rows))
    print(sweep_csv(rows), end="")
    print(sweep_summary(rows, eps, rho))


if __name__ == "__main__":
    main()
