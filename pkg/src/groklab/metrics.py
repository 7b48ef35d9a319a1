"""Named matrix metrics shared by training snapshots and bundle analysis."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .complexity import (BLOCK_SIDES, ALPHABETS, CtmTable, bdm, gini, ipr, matrix_norms,
                         realify, spectral_density)
from .geometry import (betti1_max_lifetime, circular_correlation, farthest_point_subsample,
                       homomorphism_error, operand_embedding, ring_angles)

SCALAR_METRICS = ("gini", "ipr", "spectral_gini", "spectral_ipr", "bdm",
                  "stable_rank", "nuclear", "effective_rank")
GEOMETRY_METRICS = ("betti1", "circ_corr", "hom_error")
ALL_METRICS = SCALAR_METRICS + GEOMETRY_METRICS
DEFAULT_METRICS = ("gini", "ipr", "spectral_gini", "spectral_ipr", "bdm", "stable_rank")


def spearman(a, b) -> float:
    """Spearman rank correlation with average ranks for ties."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape or a.size < 2:
        raise ValueError("spearman needs two equal-length samples of size >= 2")
    ra, rb = _rank(a), _rank(b)
    ra, rb = ra - ra.mean(), rb - rb.mean()
    denom = math.sqrt(float(ra @ ra) * float(rb @ rb))
    return float(ra @ rb / denom) if denom > 0 else float("nan")


def _rank(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    xs = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j)
        i = j + 1
    return ranks


def _real_view(M: np.ndarray) -> np.ndarray:
    return realify(M) if np.iscomplexobj(M) else np.asarray(M, dtype=float)


def metric_columns(metrics, grid) -> list[str]:
    cols = []
    for m in metrics:
        if m == "bdm":
            cols += [f"bdm_q{q}_b{b}" for q, b in grid]
        else:
            cols.append(m)
    return cols


def _safe(fn: Callable[[], float]) -> float:
    try:
        return float(fn())
    except ValueError:
        return float("nan")


def _dominant_column(E: np.ndarray) -> np.ndarray:
    return E[:, int(np.argmax(np.linalg.norm(E, axis=0)))]


def compute_metrics(M: np.ndarray, metrics=DEFAULT_METRICS, grid=((4, 4),),
                    table: CtmTable | None = None, rips_points: int = 64) -> dict[str, float]:
    """Evaluate each named metric on M; undefined values come back as NaN.

    Magnitude metrics (gini, ipr) use |M| entrywise, so they are invariant
    under entry permutations. ``spectral_*`` use the 2-D power spectrum of
    the realified matrix. Geometry metrics treat M as SFM weights.
    """
    M = np.asarray(M)
    unknown = [m for m in metrics if m not in ALL_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; choose from {ALL_METRICS}")
    for q, b in grid:
        if q not in ALPHABETS or b not in BLOCK_SIDES:
            raise ValueError(f"bdm grid point (q={q}, b={b}) outside {ALPHABETS} x {BLOCK_SIDES}")
    R = _real_view(M)
    mag = np.abs(M)
    out: dict[str, float] = {}
    for name in metrics:
        if name == "gini":
            out[name] = _safe(lambda: gini(mag))
        elif name == "ipr":
            out[name] = _safe(lambda: ipr(mag))
        elif name in ("spectral_gini", "spectral_ipr"):
            S = spectral_density(R)
            out[name] = _safe(lambda: gini(S) if name == "spectral_gini" else ipr(S))
        elif name == "bdm":
            for q, b in grid:
                out[f"bdm_q{q}_b{b}"] = _safe(lambda: bdm(R, q=q, b=b, table=table).value)
        elif name in ("stable_rank", "nuclear", "effective_rank"):
            out[name] = _safe(lambda: getattr(matrix_norms(M), name))
        elif name == "betti1":
            cloud = realify(operand_embedding(M)) if _is_sfm(M) else R
            idx = farthest_point_subsample(cloud, rips_points)
            out[name] = _safe(lambda: betti1_max_lifetime(cloud[idx]))
        elif name == "circ_corr":
            out[name] = _safe(lambda: circular_correlation(
                ring_angles(realify(operand_embedding(M))), M.shape[0])) if _is_sfm(M) else math.nan
        elif name == "hom_error":
            out[name] = _safe(lambda: homomorphism_error(
                _dominant_column(operand_embedding(M)), M.shape[0])) if _is_sfm(M) else math.nan
    return out


def _is_sfm(M: np.ndarray) -> bool:
    return M.ndim == 2 and M.shape[0] == M.shape[1] and M.shape[0] >= 3
