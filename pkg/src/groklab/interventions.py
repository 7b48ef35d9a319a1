"""Mode-level probes on a trained SFM.

The SFM has no attention heads, so the intervention unit is the per-mode
contribution ``a_kl(u, v) = W[k, l] chi_k(u) chi_l(v)``. Patching a set of
modes grafts those contributions from a second context into the first. This
is an analogue of head-level activation patching, not a reproduction of it.

Contexts live in the coordinates of ``W``: residues for add/sub, discrete
logs for reindexed mul/div.
"""

from __future__ import annotations

import csv
import io as _io
import math
import warnings
from typing import Iterable, NamedTuple

import numpy as np

from .rng import SplitMix64
from .sfm import build_problem
from .spectral import character_vector, decode_many, evaluate_grid, logits
from .tasks import DatasetSplit


class Context(NamedTuple):
    u: int
    v: int
    y: int


class DegenerateContextWarning(UserWarning):
    pass


def _mode_mask(modes: Iterable[tuple[int, int]], m: int) -> np.ndarray:
    mask = np.zeros((m, m), dtype=bool)
    for k, l in modes:
        if not (0 <= k < m and 0 <= l < m):
            raise ValueError(f"mode ({k}, {l}) outside [0, {m})^2")
        mask[k, l] = True
    return mask


def mode_activations(W: np.ndarray, u: int, v: int) -> np.ndarray:
    """Matrix of per-mode contributions whose sum is h(u, v)."""
    m = W.shape[0]
    return W * np.outer(character_vector(u, m), character_vector(v, m))


def _margin(h: complex, y1: int, y2: int, m: int) -> float:
    z = logits(h, m)
    return float(z[y2] - z[y1])


def cms_patch(W: np.ndarray, s1: Context, s2: Context, modes) -> float:
    """Change in the (y2 - y1) logit margin after grafting ``modes`` from s2 into s1."""
    m = W.shape[0]
    if s1.y == s2.y:
        warnings.warn("y1 == y2: the logit margin is identically zero",
                      DegenerateContextWarning, stacklevel=2)
    mask = _mode_mask(modes, m)
    a1 = mode_activations(W, s1.u, s1.v)
    a2 = mode_activations(W, s2.u, s2.v)
    h_base = complex(a1.sum())
    h_patch = complex(np.where(mask, a2, a1).sum())
    return _margin(h_patch, s1.y, s2.y, m) - _margin(h_base, s1.y, s2.y, m)


def _test_accuracy(W: np.ndarray, split: DatasetSplit, p: int, op: str, reindex: bool) -> float:
    prob = build_problem(split, p, op, reindex)
    if prob.m != W.shape[0]:
        raise ValueError(f"W is {W.shape[0]}x{W.shape[0]} but the task grid is {prob.m}x{prob.m}")
    if not prob.test_mask.any():
        return float("nan")
    pred = decode_many(evaluate_grid(W), prob.m)
    return float(np.mean(pred[prob.test_mask] == prob.target[prob.test_mask]))


def ablate_support(W: np.ndarray, modes, split: DatasetSplit, p: int | None = None,
                   op: str = "add", reindex: bool = True) -> tuple[float, float]:
    """Test accuracy before and after zeroing ``modes`` on a copy of W."""
    if p is None:
        p = W.shape[0]
    before = _test_accuracy(W, split, p, op, reindex)
    ablated = np.array(W, copy=True)
    ablated[_mode_mask(modes, W.shape[0])] = 0
    after = _test_accuracy(ablated, split, p, op, reindex)
    return before, after


def shuffle_weights(W: np.ndarray, seed: int) -> np.ndarray:
    """Seeded Fisher-Yates permutation of all entries (row-major order)."""
    flat = list(np.asarray(W).ravel())
    SplitMix64(seed).shuffle(flat)
    return np.array(flat, dtype=np.asarray(W).dtype).reshape(np.shape(W))


def sample_contexts(p: int, n_pairs: int, seed: int, op: str = "add") -> list[tuple[Context, Context]]:
    """Seeded context pairs with distinct answers, in residue coordinates."""
    from .tasks import eval_mod_op

    rng = SplitMix64(seed)
    out = []
    while len(out) < n_pairs:
        u1, v1, u2, v2 = (rng.below(p) for _ in range(4))
        if op == "div" and (v1 == 0 or v2 == 0):
            continue
        s1 = Context(u1, v1, eval_mod_op(u1, v1, op, p))
        s2 = Context(u2, v2, eval_mod_op(u2, v2, op, p))
        if s1.y != s2.y:
            out.append((s1, s2))
    return out


class CmsRow(NamedTuple):
    k: int
    l: int
    cms_mean: float
    cms_std: float


def cms_sweep(W: np.ndarray, pairs: list[tuple[Context, Context]], modes=None) -> list[CmsRow]:
    """Mean and population std of the single-mode CMS over context pairs."""
    m = W.shape[0]
    if modes is None:
        modes = [(k, l) for k in range(m) for l in range(m)]
    rows = []
    for k, l in modes:
        scores = np.array([cms_patch(W, s1, s2, [(k, l)]) for s1, s2 in pairs])
        rows.append(CmsRow(k, l, float(scores.mean()), float(scores.std())))
    return rows


def cms_rows_to_csv(rows: list[CmsRow]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CmsRow._fields)
    for r in rows:
        w.writerow([r.k, r.l, repr(r.cms_mean), repr(r.cms_std)])
    return buf.getvalue()


def closed_form_diagonal_cms(y1: int, y2: int, p: int) -> float:
    """CMS of patching (1,1) on W = e_11: 2 (1 - cos(2 pi (y2 - y1) / p))."""
    return 2.0 * (1.0 - math.cos(2 * math.pi * ((y2 - y1) % p) / p))
