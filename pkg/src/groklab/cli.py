"""Command-line entry point: ``groklab <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .complexity import CtmTable
from .config import ConfigError, RunConfig, load_config
from .experiments import run_training, sweep_csv, sweep_primes, write_run
from .io import BundleError, TraceFormatError, atomic_write_text, read_bundle, read_trace
from .metrics import ALL_METRICS, DEFAULT_METRICS, compute_metrics, metric_columns
from .plot import plot_trace
from .sfm import CrossoverDomainError, SfmDivergenceError, predict_crossover
from .tasks import OPS, TaskSpec, enumerate_pairs, random_label_dataset, split_dataset, write_dataset

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
_DEFAULTS = RunConfig()


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        self.usage = usage
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _add_run_flags(sp: argparse.ArgumentParser) -> None:
    d = _DEFAULTS
    g = sp.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", help="key=value file; flags given here win")
    g.add_argument("--p", type=int, help=f"prime modulus (default {d.p})")
    g.add_argument("--op", choices=OPS, help=f"operation (default {d.op})")
    g.add_argument("--beta", type=float, help=f"complexity weight (default {d.beta})")
    g.add_argument("--eta", type=float, help=f"drift step size (default {d.eta})")
    g.add_argument("--max-steps", type=int, help=f"training steps (default {d.max_steps})")
    g.add_argument("--batch-size", type=int, help=f"n_eff increment per step (default {d.batch_size})")
    g.add_argument("--eps-gen", type=float, help=f"generalisation cost per sample (default {d.eps_gen})")
    g.add_argument("--record-every", type=int, help=f"trace stride (default {d.record_every})")
    g.add_argument("--init", choices=("gaussian", "zero"), help=f"initialisation (default {d.init})")
    g.add_argument("--init-scale", type=float, help="Gaussian init scale (default 0.5/p)")
    g.add_argument("--tau-sample-size", choices=("train", "n_eff"),
                   help=f"sample size dividing the gate threshold (default {d.tau_sample_size})")
    g.add_argument("--no-reindex", dest="reindex", action="store_const", const=False,
                   help="disable discrete-log reindexing for mul/div")
    g.add_argument("--c-float", type=float, help=f"bits per stored coefficient (default {d.c_float})")
    g.add_argument("--frac", type=float, help=f"training fraction (default {d.frac})")
    g.add_argument("--split-seed", type=int, help=f"split seed (default {d.split_seed})")
    g.add_argument("--seeds", help="comma-separated init seeds (default 0)")
    g.add_argument("--seed", type=int, help="single init seed (shorthand for --seeds)")
    g.add_argument("--metrics", help=f"comma list from {','.join(ALL_METRICS)} (default none)")
    g.add_argument("--metrics-every", type=int, help=f"snapshot stride (default {d.metrics_every})")
    g.add_argument("--bdm-grid", help="comma list of QxB pairs (default 4x4)")
    g.add_argument("--out-dir", help=f"output directory (default {d.out_dir})")


_RUN_KEYS = ("p", "op", "beta", "eta", "max_steps", "batch_size", "eps_gen", "record_every",
             "init", "init_scale", "tau_sample_size", "reindex", "c_float", "frac",
             "split_seed", "seeds", "metrics", "metrics_every", "bdm_grid", "out_dir")


def _run_config(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in _RUN_KEYS}
    if args.seed is not None:
        if args.seeds is not None:
            raise UsageError("--seed and --seeds are mutually exclusive")
        overrides["seeds"] = [args.seed]
    try:
        return load_config(args.config, overrides)
    except ConfigError as exc:
        raise UsageError(f"--{exc.key.replace('_', '-')}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groklab", description="Spectral feature machine grokking lab.",
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    g = sub.add_parser("gen-data", help="write a modular-arithmetic dataset CSV + sidecar")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--op", choices=OPS, default="add")
    g.add_argument("--frac", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0, help="split seed")
    g.add_argument("--random-labels", type=int, metavar="SEED",
                   help="replace labels with uniform draws from this seed")
    g.add_argument("--out", default="data.csv")

    t = sub.add_parser("train-sfm", help="train an SFM; write trace, weights bundle and SVG")
    _add_run_flags(t)

    a = sub.add_parser("analyze-bundle", help="apply metrics to every entry of a bundle")
    a.add_argument("bundle")
    a.add_argument("--metrics", default=",".join(DEFAULT_METRICS),
                   help=f"comma list from {','.join(ALL_METRICS)}")
    a.add_argument("--bdm-grid", default="4x4", help="comma list of QxB pairs")
    a.add_argument("--ctm-table", help="CSV with header b,q,block,ctm")
    a.add_argument("--out", default="metrics.csv")

    s = sub.add_parser("sweep-p", help="crossover step vs predicted n* over a prime list")
    _add_run_flags(s)
    s.add_argument("--primes", default="13,29,53")
    s.add_argument("--fit-prime", type=int, help="prime used to fit eps_gen (default: first)")
    s.add_argument("--out", default="sweep.csv")

    c = sub.add_parser("predict-crossover", help="print n* for (beta, p, eps_gen)")
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)

    pl = sub.add_parser("plot", help="render a trace CSV to SVG")
    pl.add_argument("trace")
    pl.add_argument("--out")
    pl.add_argument("--log-x", action="store_true")
    return parser


def _cmd_gen_data(args) -> int:
    try:
        spec = TaskSpec(p=args.p, op=args.op, split_fraction=args.frac, split_seed=args.seed)
    except ValueError as exc:
        raise UsageError(f"--p/--op/--frac/--seed: {exc}") from None
    pairs = enumerate_pairs(spec)
    if args.random_labels is not None:
        pairs = random_label_dataset(pairs, args.random_labels, spec.p)
    split = split_dataset(pairs, spec.split_fraction, spec.split_seed)
    sidecar = write_dataset(args.out, spec, pairs, split, args.random_labels)
    print(f"wrote {len(pairs)} rows to {args.out} (split in {sidecar})")
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = _run_config(args)
    for seed in cfg.seeds:
        out = Path(cfg.out_dir) if len(cfg.seeds) == 1 else Path(cfg.out_dir) / f"seed{seed}"
        result = run_training(cfg, seed)
        paths = write_run(cfg, result, out)
        last = result.trace.rows[-1]
        print(f"seed {seed}: step {last.step} train_acc {last.train_acc:.4f} "
              f"test_acc {last.test_acc:.4f} support {last.support_size} -> {paths['trace']}")
    return EXIT_OK


def _parse_grid(text: str):
    try:
        cfg = RunConfig().with_updates({"bdm_grid": text})
        return cfg.validate().bdm_grid
    except (ConfigError, ValueError) as exc:
        raise UsageError(f"--bdm-grid: {exc}") from None


def _cmd_analyze(args) -> int:
    metrics = [m for m in args.metrics.split(",") if m]
    bad = [m for m in metrics if m not in ALL_METRICS]
    if bad:
        raise UsageError(f"--metrics: unknown {bad}")
    grid = _parse_grid(args.bdm_grid)
    table = CtmTable.from_csv(args.ctm_table) if args.ctm_table else None
    entries = read_bundle(args.bundle)
    cols = metric_columns(metrics, grid)
    lines = [",".join(["name", "rows", "cols"] + cols)]
    for name, arr in entries:
        vals = compute_metrics(arr, metrics, grid, table)
        lines.append(",".join([name, str(arr.shape[0]), str(arr.shape[1])]
                              + ["%.17g" % vals[c] for c in cols]))
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote metrics for {len(entries)} entries to {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _run_config(args)
    try:
        primes = [int(t) for t in args.primes.split(",") if t]
        cfg_check = [cfg.with_updates({"p": p}).validate() for p in primes]
    except (ConfigError, ValueError) as exc:
        raise UsageError(f"--primes: {exc}") from None
    del cfg_check
    rows, eps, rho = sweep_primes(cfg, primes, args.fit_prime)
    atomic_write_text(args.out, sweep_csv(rows))
    for r in rows:
        print(f"p={r.p}: observed step {r.observed_step}, predicted n* {r.predicted_n:.1f} "
              f"(step {r.predicted_step:.1f})")
    print(f"eps_gen fit {eps:.6g}; spearman {rho}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    try:
        n_star = predict_crossover(args.beta, args.p, args.eps)
    except CrossoverDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{n_star:.6f}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    trace = read_trace(args.trace)
    if not trace.rows:
        raise ValueError(f"{args.trace}: trace has no rows to plot")
    out = args.out or str(Path(args.trace).with_suffix(".svg"))
    plot_trace(trace, out, log_x=args.log_x)
    print(f"wrote {out}")
    return EXIT_OK


_COMMANDS = {"gen-data": _cmd_gen_data, "train-sfm": _cmd_train, "analyze-bundle": _cmd_analyze,
             "sweep-p": _cmd_sweep, "predict-crossover": _cmd_predict, "plot": _cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(exc.usage or parser.format_usage())
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BundleError, TraceFormatError, SfmDivergenceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
