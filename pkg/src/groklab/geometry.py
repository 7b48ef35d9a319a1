"""Representation geometry: PCA, ring alignment diagnostics and Rips persistence."""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple

import numpy as np

from .spectral import character_table

PCA_TOL = 1e-10
PCA_MAX_ITER = 20000
RIPS_MAX_POINTS = 256


class Bar(NamedTuple):
    dim: int
    birth: float
    death: float

    @property
    def lifetime(self) -> float:
        return self.death - self.birth


def _as_cloud(cloud) -> np.ndarray:
    X = np.asarray(cloud, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("point cloud must be an n x d array with n >= 1")
    if not np.isfinite(X).all():
        raise ValueError("point cloud has non-finite coordinates")
    return X


# -- PCA ----------------------------------------------------------------------

def _power_iteration(C: np.ndarray, start: np.ndarray, tol: float, max_iter: int):
    v = start / np.linalg.norm(start)
    lam = float(v @ C @ v)
    for _ in range(max_iter):
        w = C @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        v_new = w / norm
        lam_new = float(v_new @ C @ v_new)
        resid = np.linalg.norm(C @ v_new - lam_new * v_new)
        v = v_new
        if resid <= tol * max(abs(lam_new), 1.0) or abs(lam_new - lam) <= 1e-15 * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    return lam, v


def pca_project(cloud, k: int, tol: float = PCA_TOL, max_iter: int = PCA_MAX_ITER):
    """Project onto the top-k principal axes found by deflated power iteration.

    Variances use the 1/n covariance. Each axis is signed so its first
    nonzero coordinate is positive. Returns (projected n x k, variances).
    """
    X = _as_cloud(cloud)
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} must lie in [1, min(n, d)={min(n, d)}]")
    Xc = X - X.mean(axis=0)
    C = Xc.T @ Xc / n
    if np.trace(C) <= 0:
        raise ValueError("zero-variance point cloud")
    axes, variances = [], []
    rng = np.random.default_rng(0)
    for _ in range(k):
        start = rng.standard_normal(d)
        for a in axes:
            start -= (start @ a) * a
        lam, v = _power_iteration(C, start, tol, max_iter)
        for a in axes:  # keep numerically orthogonal to earlier axes
            v -= (v @ a) * a
        v /= np.linalg.norm(v)
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            v = -v
        lam = max(float(v @ C @ v), 0.0)
        axes.append(v)
        variances.append(lam)
        C = C - lam * np.outer(v, v)
    V = np.stack(axes, axis=1)
    return Xc @ V, np.array(variances)


# -- ring diagnostics ---------------------------------------------------------

def circular_correlation(angles, p: int) -> float:
    """|Fisher-Lee rho| between theta(x) and the ideal ring angle 2 pi x / p."""
    theta = np.asarray(angles, dtype=float).ravel()
    if theta.size < 3:
        raise ValueError("circular correlation needs at least 3 points")
    if theta.size != p:
        raise ValueError(f"expected one angle per element of Z_{p}, got {theta.size}")
    phi = 2 * np.pi * np.arange(p) / p
    iu = np.triu_indices(p, k=1)
    a = np.sin(np.subtract.outer(theta, theta))[iu]
    b = np.sin(np.subtract.outer(phi, phi))[iu]
    denom = math.sqrt(float(np.sum(a * a) * np.sum(b * b)))
    if denom == 0.0:
        return 0.0
    return float(abs(np.sum(a * b)) / denom)


def homomorphism_error(embed, p: int) -> float:
    """Mean over (a, b) of |psi(a+b) - psi(a) psi(b)| with psi = embed / |embed|."""
    z = np.asarray([embed(x) for x in range(p)] if callable(embed) else embed,
                   dtype=complex).ravel()
    if z.size != p:
        raise ValueError(f"expected {p} embedding values, got {z.size}")
    mag = np.abs(z)
    if (mag == 0).any():
        raise ValueError(f"zero embedding at x={int(np.flatnonzero(mag == 0)[0])}")
    psi = z / mag
    idx = np.arange(p)
    lhs = psi[np.add.outer(idx, idx) % p]
    return float(np.mean(np.abs(lhs - np.outer(psi, psi))))


def operand_embedding(W: np.ndarray) -> np.ndarray:
    """Row u holds the operand-u feature sum_k W[k, l] chi_k(u) for each l."""
    return character_table(W.shape[0]) @ W


def ring_angles(cloud) -> np.ndarray:
    """Angle of each point in the plane of its top two principal axes."""
    proj, _ = pca_project(cloud, 2)
    return np.arctan2(proj[:, 1], proj[:, 0])


# -- Vietoris-Rips persistence ------------------------------------------------

def farthest_point_subsample(cloud, k: int, start: int = 0) -> np.ndarray:
    """Indices of k points picked greedily by max-min distance."""
    X = _as_cloud(cloud)
    k = min(k, X.shape[0])
    chosen = [start]
    dist = np.linalg.norm(X - X[start], axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(X - X[nxt], axis=1))
    return np.array(chosen)


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def vietoris_rips_persistence(cloud, max_dim: int = 1, max_points: int = RIPS_MAX_POINTS,
                              keep_zero: bool = False) -> list[Bar]:
    """H0 and H1 barcodes of the Euclidean Rips filtration (2-skeleton).

    H0 comes from union-find over edges in filtration order. H1 comes from
    the standard column reduction over GF(2) of the triangle boundary matrix,
    with columns stored as sets of edge indices. Zero-length bars are dropped
    unless ``keep_zero``. Bars are returned by dimension, longest first.
    """
    if max_dim not in (0, 1):
        raise ValueError("only max_dim 0 or 1 is supported")
    X = _as_cloud(cloud)
    n = X.shape[0]
    if n > max_points:
        raise ValueError(f"{n} points exceeds the Rips cap of {max_points}; "
                         "subsample first (farthest_point_subsample)")
    D = np.sqrt(np.maximum(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1), 0.0))
    iu, ju = np.triu_indices(n, k=1)
    lengths = D[iu, ju]
    order = np.lexsort((ju, iu, lengths))
    edges = list(zip(iu[order].tolist(), ju[order].tolist()))
    edge_val = lengths[order]
    edge_id = {e: r for r, e in enumerate(edges)}

    bars: list[Bar] = []
    parent = list(range(n))
    for (a, b), val in zip(edges, edge_val):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
            bars.append(Bar(0, 0.0, float(val)))
    bars.append(Bar(0, 0.0, math.inf))

    if max_dim >= 1 and n >= 3:
        tris = []
        for a, b, c in itertools.combinations(range(n), 3):
            e1, e2, e3 = edge_id[(a, b)], edge_id[(a, c)], edge_id[(b, c)]
            top = max(e1, e2, e3)
            tris.append((edge_val[top], top, (e1, e2, e3)))
        tris.sort(key=lambda t: (t[0], t[1]))
        pivots: dict[int, set] = {}
        for val, _, faces in tris:
            col = set(faces)
            while col:
                low = max(col)
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    bars.append(Bar(1, float(edge_val[low]), float(val)))
                    break
                col ^= other

    if not keep_zero:
        bars = [b for b in bars if b.death > b.birth]
    bars.sort(key=lambda b: (b.dim, -b.lifetime, b.birth))
    return bars


def betti1_max_lifetime(cloud, **kwargs) -> float:
    h1 = [b.lifetime for b in vietoris_rips_persistence(cloud, 1, **kwargs) if b.dim == 1]
    return max(h1, default=0.0)
