"""Run drivers shared by the CLI and the scripts: one training run, p sweeps."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .io import atomic_write_text, write_bundle, write_trace
from .metrics import compute_metrics, metric_columns, spearman
from .plot import plot_trace
from .sfm import TrainTrace, calibrate_eps_gen, predict_crossover, train
from .tasks import make_split

CROSSOVER_LEVEL = 0.99


@dataclass
class RunResult:
    seed: int
    trace: TrainTrace
    init_weights: np.ndarray
    metrics: list[dict] | None = None


def run_training(cfg: RunConfig, seed: int) -> RunResult:
    """Train one SFM; optionally collect metric snapshots every ``metrics_every`` steps."""
    split = make_split(cfg.task_spec())
    sfm_cfg = cfg.sfm_config(seed)
    snaps: list[dict] = []
    first: dict[str, np.ndarray] = {}

    def on_record(step, W):
        if step == 0:
            first["W"] = W.copy()
        if cfg.metrics and step % cfg.metrics_every == 0:
            row = {"step": step}
            row.update(compute_metrics(W, cfg.metrics, cfg.bdm_grid))
            snaps.append(row)

    trace = train(sfm_cfg, split, on_record=on_record)
    last = trace.rows[-1].step
    if cfg.metrics and (not snaps or snaps[-1]["step"] != last):
        row = {"step": last}
        row.update(compute_metrics(trace.final_weights, cfg.metrics, cfg.bdm_grid))
        snaps.append(row)
    return RunResult(seed, trace, first.get("W"), snaps if cfg.metrics else None)


def metrics_csv(rows: list[dict], metrics, grid) -> str:
    cols = ["step"] + metric_columns(metrics, grid)
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(str(r["step"]) if c == "step" else "%.17g" % r[c] for c in cols))
    return "\n".join(lines) + "\n"


def write_run(cfg: RunConfig, result: RunResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    paths = {
        "trace": out / "trace.csv",
        "weights": out / "weights.glab",
        "plot": out / "trace.svg",
        "config": out / "config.txt",
    }
    write_trace(result.trace, paths["trace"])
    entries = [("W_final", result.trace.final_weights)]
    if result.init_weights is not None:
        entries.insert(0, ("W_init", result.init_weights))
    write_bundle(paths["weights"], entries)
    plot_trace(result.trace, paths["plot"])
    atomic_write_text(paths["config"], cfg.to_text())
    if result.metrics is not None:
        paths["metrics"] = out / "metrics.csv"
        atomic_write_text(paths["metrics"], metrics_csv(result.metrics, cfg.metrics, cfg.bdm_grid))
    return paths


# -- modulus sweep ------------------------------------------------------------

def worker_count(jobs: int) -> int:
    cap = os.environ.get("GROKLAB_THREADS")
    n = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, jobs))


def crossover_step(trace: TrainTrace, level: float = CROSSOVER_LEVEL) -> int | None:
    return trace.first_step("test_acc", level)


def _sweep_job(args) -> tuple[int, int, int | None]:
    cfg, p, seed = args
    run_cfg = cfg.with_updates({"p": p, "metrics": []})
    trace = train(run_cfg.sfm_config(seed), make_split(run_cfg.task_spec()))
    return p, seed, crossover_step(trace)


@dataclass
class SweepRow:
    p: int
    observed_steps: list
    observed_step: float      # median over seeds that crossed; NaN if fewer than half did
    predicted_n: float
    predicted_step: float


def sweep_primes(cfg: RunConfig, primes, fit_prime: int | None = None,
                 workers: int | None = None) -> tuple[list[SweepRow], float, float]:
    """Crossover step per prime, and the predictor calibrated on ``fit_prime``.

    Returns (rows, eps_gen_fit, spearman rho between observed and predicted).
    """
    primes = list(primes)
    fit_prime = primes[0] if fit_prime is None else fit_prime
    if fit_prime not in primes:
        raise ValueError(f"fit prime {fit_prime} is not in the sweep")
    jobs = [(cfg, p, s) for p in primes for s in cfg.seeds]
    n_workers = worker_count(len(jobs)) if workers is None else workers
    if n_workers == 1:
        results = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    by_p = {p: [s for q, _, s in results if q == p] for p in primes}
    observed = {}
    for p, steps in by_p.items():
        crossed = [s for s in steps if s is not None]
        observed[p] = float(np.median(crossed)) if 2 * len(crossed) >= len(steps) else float("nan")
    n_fit = observed[fit_prime] * cfg.batch_size
    if not np.isfinite(n_fit) or n_fit <= np.e:
        raise ValueError(f"no usable crossover at the fit prime p={fit_prime}")
    eps = calibrate_eps_gen(cfg.beta, fit_prime, n_fit)
    rows = []
    for p in primes:
        n_star = predict_crossover(cfg.beta, p, eps)
        rows.append(SweepRow(p, by_p[p], observed[p], n_star, n_star / max(cfg.batch_size, 1)))
    obs = [r.observed_step for r in rows]
    rho = spearman(obs, [r.predicted_n for r in rows]) if np.isfinite(obs).all() else float("nan")
    return rows, eps, rho


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["p,observed_step,predicted_n,predicted_step,seed_steps"]
    for r in rows:
        seeds = ";".join("none" if s is None else str(s) for s in r.observed_steps)
        lines.append(f"{r.p},{r.observed_step!r},{r.predicted_n!r},{r.predicted_step!r},{seeds}")
    return "\n".join(lines) + "\n"


def sweep_summary(rows, eps, rho) -> str:
    return json.dumps({"eps_gen_fit": eps, "spearman": rho,
                       "primes": [r.p for r in rows]}, indent=1)
