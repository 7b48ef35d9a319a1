"""Singular Feature Machine: drift + Occam gate training, complexity proxies,
free-energy surrogates and the Lambert-W crossover predictor.

One training step is

    W_tilde = W + (eta / n_train) * sum_i delta_i * conj(chi_k(u_i) chi_l(v_i))
    W       = W_tilde * [|W_tilde| > tau]

with ``delta_i = chi_1(y_i) - h(u_i, v_i; W)``. The gate threshold is
``tau = sqrt(2 beta ln n_eff / n_fit)`` where ``n_eff = max(1, step*batch)``.
``n_fit`` defaults to the number of training pairs (the curvature of the
summed fit term), which makes the gate the exact per-coordinate minimiser of
the objective; ``tau_sample_size="n_eff"`` gives the single-n form
``sqrt(2 beta ln n / n)`` instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .spectral import (character_table, decode_many, discrete_log_reindex,
                       evaluate_grid, evaluate_many, primitive_root)
from .tasks import DatasetSplit, ExamplePair, is_prime

DIVERGENCE_LIMIT = 1e6


class SfmDivergenceError(RuntimeError):
    pass


class CrossoverDomainError(ValueError):
    pass


@dataclass
class SfmConfig:
    p: int = 29
    op: str = "add"
    beta: float = 0.0024
    eta: float = 0.5
    max_steps: int = 3000
    batch_size: int = 512
    eps_gen: float = 1.0
    record_every: int = 1
    init: str = "zero"               # "zero" or "gaussian"
    init_scale: float | None = None  # None -> 0.5 / p
    init_seed: int = 0
    reindex: bool = True             # discrete-log reindexing for mul/div
    tau_sample_size: str = "train"   # "train" or "n_eff"
    c_float: float = 64.0

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.eps_gen <= 0:
            raise ValueError("eps_gen must be > 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.max_steps < 0 or self.batch_size < 0:
            raise ValueError("max_steps and batch_size must be unsigned")
        if self.init not in ("gaussian", "zero"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.tau_sample_size not in ("train", "n_eff"):
            raise ValueError(f"unknown tau_sample_size {self.tau_sample_size!r}")

    @property
    def scale(self) -> float:
        return 0.5 / self.p if self.init_scale is None else self.init_scale

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SfmState:
    W: np.ndarray
    step: int = 0
    n_eff: float = 1.0


TRACE_COLUMNS = ("step", "n_eff", "tau", "train_loss", "train_acc", "test_acc",
                 "lambda_proxy", "kc_sfm", "support_size")


class TraceRow(NamedTuple):
    step: int
    n_eff: float
    tau: float
    train_loss: float
    train_acc: float
    test_acc: float
    lambda_proxy: float
    kc_sfm: float
    support_size: int


@dataclass
class TrainTrace:
    rows: list[TraceRow] = field(default_factory=list)
    final_weights: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def first_step(self, name: str, level: float, strict: bool = False) -> int | None:
        """First recorded step where ``name`` reaches ``level``."""
        for r in self.rows:
            x = getattr(r, name)
            if (x > level) if strict else (x >= level):
                return r.step
        return None


# -- objective and dynamics ---------------------------------------------------

def support_size(W: np.ndarray) -> int:
    return int(np.count_nonzero(W))


def objective(W: np.ndarray, data: Sequence[ExamplePair], beta: float, n: float) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    p = W.shape[0]
    us, vs, ys = _columns(data)
    resid = np.exp(2j * np.pi * ys / p) - evaluate_many(W, us, vs)
    return 0.5 * float(np.sum(np.abs(resid) ** 2)) + beta * math.log(n) * support_size(W)


def drift_step(W: np.ndarray, data: Sequence[ExamplePair], eta: float, n: float | None = None) -> np.ndarray:
    """One holographic drift step; ``n`` defaults to ``len(data)``."""
    if not data:
        raise ValueError("drift needs at least one example")
    p = W.shape[0]
    n = len(data) if n is None else n
    us, vs, ys = _columns(data)
    delta = np.exp(2j * np.pi * ys / p) - evaluate_many(W, us, vs)
    C = np.conj(character_table(p))
    grad = np.einsum("i,ik,il->kl", delta, C[us], C[vs])
    return W + (eta / n) * grad


def threshold(beta: float, n: float, n_fit: float | None = None) -> float:
    """sqrt(2 beta ln n / n_fit); ``n_fit`` defaults to ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_fit = n if n_fit is None else n_fit
    return math.sqrt(2.0 * beta * math.log(n) / n_fit)


def occam_gate(W_tilde: np.ndarray, tau: float) -> np.ndarray:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return np.where(np.abs(W_tilde) > tau, W_tilde, 0)


def n_eff_schedule(step: int, batch: int) -> float:
    return float(max(1, step * batch))


def rlct_proxy(W: np.ndarray) -> float:
    return support_size(W) / 2.0


def kc_sfm(W: np.ndarray, c_float: float, p: int) -> float:
    if c_float <= 0:
        raise ValueError("c_float must be > 0")
    nnz = support_size(W)
    return nnz * math.log2(p * p) + nnz * c_float


# -- free energy and crossover -----------------------------------------------

def free_energy_surrogates(n: float, p: int, beta: float, eps_gen: float) -> tuple[float, float]:
    if n < 1:
        raise ValueError("n must be >= 1")
    ln_n = math.log(n)
    return beta * ln_n * p * p, n * eps_gen + beta * ln_n * p


def lambertw_m1(z: float, tol: float = 1e-14, max_iter: int = 100) -> float:
    """Lower real branch W_{-1}(z) for z in [-1/e, 0), by Halley iteration.

    Starting points: the branch-point series in sqrt(2(ez+1)) near -1/e,
    otherwise the asymptotic ln(-z) - ln(-ln(-z)) expansion. Iterates until
    the relative step falls below ``tol`` (converges cubically, typically in
    under 6 iterations).
    """
    branch = -1.0 / math.e
    if not (branch - 1e-15 <= z < 0.0):
        raise CrossoverDomainError(f"W_-1 is real only on [-1/e, 0); got z={z!r}")
    q = 2.0 * (math.e * z + 1.0)
    if q <= 0.0:
        return -1.0
    if q < 0.5:
        s = -math.sqrt(q)
        w = -1.0 + s - s * s / 3.0 + 11.0 / 72.0 * s ** 3
    else:
        l1 = math.log(-z)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= tol * abs(w):
            break
    return w


def predict_crossover(beta: float, p: int, eps_gen: float) -> float:
    """n* solving n / ln n = beta (p^2 - p) / eps_gen on the large-n branch."""
    a = beta * (p * p - p)
    if a <= 0 or eps_gen <= 0:
        raise CrossoverDomainError("no crossover: need beta * (p^2 - p) > 0 and eps_gen > 0")
    z = -eps_gen / a
    if z < -1.0 / math.e - 1e-15:
        raise CrossoverDomainError(
            f"no crossover: eps_gen / (beta (p^2 - p)) = {-z:.6g} exceeds 1/e")
    return -a * lambertw_m1(z) / eps_gen


def calibrate_eps_gen(beta: float, p: int, n_observed: float) -> float:
    """The eps_gen for which ``predict_crossover`` returns ``n_observed``."""
    if n_observed <= math.e:
        raise ValueError("observed crossover must exceed e")
    return beta * (p * p - p) * math.log(n_observed) / n_observed


# -- training -----------------------------------------------------------------

@dataclass
class SpectralProblem:
    """Training data laid out on the m x m operand grid the SFM sees.

    For add/sub (or unreindexed mul/div) m = p and coordinates are the raw
    residues. Reindexed mul/div use discrete logs on Z_p^x, so m = p - 1 and
    pairs touching 0 are dropped.
    """
    m: int
    target: np.ndarray        # m x m class indices in Z_m (-1 where undefined)
    train_mask: np.ndarray
    test_mask: np.ndarray

    @property
    def n_train(self) -> int:
        return int(self.train_mask.sum())


def build_problem(split: DatasetSplit, p: int, op: str, reindex: bool = True) -> SpectralProblem:
    use_log = reindex and op in ("mul", "div")
    m = p - 1 if use_log else p
    log = discrete_log_reindex(p) if use_log else None
    target = np.full((m, m), -1, dtype=int)
    masks = {"train": np.zeros((m, m), bool), "test": np.zeros((m, m), bool)}
    for part in ("train", "test"):
        for e in getattr(split, part):
            if use_log:
                if e.u == 0 or e.v == 0:
                    continue
                a, b, c = log[e.u], log[e.v], log[e.y]
            else:
                a, b, c = e.u, e.v, e.y
            if masks["train"][a, b] or masks["test"][a, b]:
                raise ValueError(f"duplicate pair ({e.u}, {e.v}) in split")
            target[a, b] = c
            masks[part][a, b] = True
    return SpectralProblem(m, target, masks["train"], masks["test"])


def init_weights(cfg: SfmConfig, m: int) -> np.ndarray:
    if cfg.init == "zero":
        return np.zeros((m, m), dtype=complex)
    rng = np.random.default_rng(cfg.init_seed)
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return cfg.scale * z / math.sqrt(2.0)


def _accuracy(pred: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return float("nan")
    return float(np.mean(pred[mask] == target[mask]))


def train(cfg: SfmConfig, split: DatasetSplit,
          on_record: Callable[[int, np.ndarray], None] | None = None) -> TrainTrace:
    if not split.train:
        raise ValueError("training split is empty")
    prob = build_problem(split, cfg.p, cfg.op, cfg.reindex)
    m = prob.m
    n_train = prob.n_train
    phase = np.exp(2j * np.pi * np.where(prob.target >= 0, prob.target, 0) / m)
    target_grid = np.where(prob.train_mask, phase, 0)
    n_fit = n_train if cfg.tau_sample_size == "train" else None

    W = init_weights(cfg, m)
    tau = 0.0
    trace = TrainTrace()
    for step in range(cfg.max_steps + 1):
        h = evaluate_grid(W)
        resid = np.where(prob.train_mask, target_grid - h, 0)
        if step % cfg.record_every == 0 or step == cfg.max_steps:
            pred = decode_many(h, m)
            nnz = support_size(W)
            trace.rows.append(TraceRow(
                step=step,
                n_eff=n_eff_schedule(step, cfg.batch_size),
                tau=tau,
                train_loss=0.5 * float(np.sum(np.abs(resid) ** 2)) / n_train,
                train_acc=_accuracy(pred, prob.target, prob.train_mask),
                test_acc=_accuracy(pred, prob.target, prob.test_mask),
                lambda_proxy=nnz / 2.0,
                kc_sfm=kc_sfm(W, cfg.c_float, cfg.p),
                support_size=nnz,
            ))
            if on_record is not None:
                on_record(step, W)
        if step == cfg.max_steps:
            break
        W_tilde = W + (cfg.eta / n_train) * np.fft.fft2(resid)
        n_next = n_eff_schedule(step + 1, cfg.batch_size)
        tau = threshold(cfg.beta, n_next, n_fit)
        W = occam_gate(W_tilde, tau)
        peak = float(np.max(np.abs(W))) if W.size else 0.0
        if not np.isfinite(peak) or peak > DIVERGENCE_LIMIT:
            raise SfmDivergenceError(
                f"|W| reached {peak:.3g} at step {step + 1} (limit {DIVERGENCE_LIMIT:g}); "
                f"eta={cfg.eta} is likely too large for n_train={n_train}")
    trace.final_weights = W
    return trace


def _columns(data: Sequence[ExamplePair]):
    arr = np.asarray([(e.u, e.v, e.y) for e in data], dtype=int).reshape(-1, 3)
    return arr[:, 0], arr[:, 1], arr[:, 2]


__all__ = [
    "SfmConfig", "SfmState", "TrainTrace", "TraceRow", "TRACE_COLUMNS",
    "objective", "drift_step", "threshold", "occam_gate", "n_eff_schedule",
    "train", "rlct_proxy", "kc_sfm", "free_energy_surrogates", "lambertw_m1",
    "predict_crossover", "calibrate_eps_gen", "build_problem", "init_weights",
    "SfmDivergenceError", "CrossoverDomainError", "primitive_root",
]
