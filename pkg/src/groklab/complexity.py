"""Scalar complexity and structure metrics.

Quantile binning, CTM lookup with an entropy fallback, BDM, Gini, IPR,
2-D spectral density, normalised-entropy geometric complexity, Gram
eigenvalue concentration and SVD-based matrix norms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

ALPHABETS = (2, 4, 8)
BLOCK_SIDES = (2, 4, 8)


class SvdConvergenceError(RuntimeError):
    pass


# -- discretisation -----------------------------------------------------------

def quantile_binning(M, q: int = 4) -> np.ndarray:
    """Map each entry to the number of per-matrix q-quantile edges it exceeds.

    Ties at an edge go to the lower bin, so a constant matrix is all zeros.
    """
    if q not in ALPHABETS:
        raise ValueError(f"alphabet size must be one of {ALPHABETS}, got {q}")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise ValueError("cannot bin an empty matrix")
    if np.isnan(M).any():
        raise ValueError("matrix contains NaN")
    edges = np.quantile(M, np.arange(1, q) / q)
    return np.searchsorted(edges, M, side="left").astype(np.int8)


def realify(W: np.ndarray) -> np.ndarray:
    """p x 2p real matrix with Re(W[:, j]) in column 2j and Im in 2j+1."""
    W = np.asarray(W)
    out = np.empty((W.shape[0], 2 * W.shape[1]), dtype=float)
    out[:, 0::2] = W.real
    out[:, 1::2] = W.imag if np.iscomplexobj(W) else 0.0
    return out


# -- CTM ----------------------------------------------------------------------

def shannon_entropy(counts) -> float:
    """Entropy in bits of an unnormalised count vector."""
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    pr = c / c.sum()
    return float(-(pr * np.log2(pr)).sum()) + 0.0


def ctm_proxy(block: str) -> float:
    """Fallback complexity 1 + b^2 * H(block) with H the per-symbol entropy."""
    _, counts = np.unique(list(block), return_counts=True)
    return 1.0 + len(block) * shannon_entropy(counts)


@dataclass
class CtmTable:
    """CTM values keyed by (b, q, row-major symbol string).

    Lookups that miss fall back to ``ctm_proxy``; ``provenance`` records for
    every key seen whether it came from the loaded table or the fallback.
    """
    values: dict[tuple[int, int, str], float] = field(default_factory=dict)
    provenance: dict[tuple[int, int, str], str] = field(default_factory=dict)

    @classmethod
    def from_csv(cls, path: str | Path) -> "CtmTable":
        table = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["b", "q", "block", "ctm"]:
                raise ValueError(f"{path}: expected header b,q,block,ctm")
            for row in reader:
                key = (int(row["b"]), int(row["q"]), row["block"])
                val = float(row["ctm"])
                if val < 0:
                    raise ValueError(f"{path}: negative CTM value for block {key[2]}")
                table.values[key] = val
                table.provenance[key] = "loaded"
        return table

    def to_csv(self, path: str | Path) -> None:
        from .io import atomic_write_text
        lines = ["b,q,block,ctm"]
        lines += [f"{b},{q},{blk},{v!r}" for (b, q, blk), v in sorted(self.values.items())]
        atomic_write_text(Path(path), "\n".join(lines) + "\n")

    def lookup(self, block: str, b: int, q: int) -> float:
        key = (b, q, block)
        if key in self.values:
            return self.values[key]
        self.provenance.setdefault(key, "fallback")
        return ctm_proxy(block)


def ctm(block: str, table: CtmTable | None = None, b: int | None = None, q: int = 4) -> float:
    if b is None:
        b = math.isqrt(len(block))
    if b * b != len(block):
        raise ValueError(f"block of length {len(block)} is not {b}x{b}")
    if table is None:
        return ctm_proxy(block)
    return table.lookup(block, b, q)


# -- BDM ----------------------------------------------------------------------

class BdmResult(NamedTuple):
    value: float
    coverage: float   # fraction of entries inside whole blocks
    n_blocks: int
    n_unique: int


def _tile(S: np.ndarray, b: int) -> tuple[np.ndarray, float]:
    if b not in BLOCK_SIDES:
        raise ValueError(f"block side must be one of {BLOCK_SIDES}, got {b}")
    rows, cols = S.shape
    if rows < b or cols < b:
        raise ValueError(f"matrix {rows}x{cols} is smaller than one {b}x{b} block")
    R, C = rows // b, cols // b
    blocks = S[:R * b, :C * b].reshape(R, b, C, b).swapaxes(1, 2).reshape(R * C, b * b)
    return blocks, (R * C * b * b) / (rows * cols)


def bdm(M, q: int = 4, b: int = 4, table: CtmTable | None = None) -> BdmResult:
    """Sum over distinct b x b blocks of CTM(block) + log2(multiplicity).

    Trailing rows and columns that do not fill a block are dropped.
    """
    S = quantile_binning(M, q)
    blocks, coverage = _tile(S, b)
    uniq, counts = np.unique(blocks, axis=0, return_counts=True)
    total = 0.0
    for blk, n in zip(uniq, counts):
        key = "".join(str(int(s)) for s in blk)
        total += ctm(key, table, b, q) + math.log2(n)
    return BdmResult(total, coverage, len(blocks), len(uniq))


def block_entropy(M, q: int = 4, b: int = 4) -> float:
    S = quantile_binning(M, q)
    blocks, _ = _tile(S, b)
    _, counts = np.unique(blocks, axis=0, return_counts=True)
    return shannon_entropy(counts)


# -- sparsity -----------------------------------------------------------------

def gini(s) -> float:
    """Gini coefficient via the sorted-rank identity (O(N log N))."""
    s = np.sort(np.asarray(s, dtype=float).ravel())
    if (s < 0).any():
        raise ValueError("gini needs a nonnegative vector")
    total = s.sum()
    if total <= 0:
        raise ValueError("gini is undefined for an all-zero vector")
    n = s.size
    ranks = np.arange(1, n + 1)
    return float(np.sum((2 * ranks - n - 1) * s) / (n * total))


def ipr(s) -> float:
    s = np.asarray(s, dtype=float).ravel()
    s2 = np.sum(s ** 2)
    if s2 <= 0:
        raise ValueError("ipr is undefined for a zero vector")
    return float(np.sum(s ** 4) / s2 ** 2)


def spectral_density(M, method: str = "fft") -> np.ndarray:
    """S[k, l] = |sum_{v,d} M[v,d] exp(-2 pi i (k v / V + l d / D))|^2."""
    M = np.asarray(M)
    if M.ndim != 2 or min(M.shape) < 1:
        raise ValueError("spectral_density needs a 2-D matrix")
    if method == "fft":
        F = np.fft.fft2(M)
    elif method == "direct":
        V, D = M.shape
        Fv = np.exp(-2j * np.pi * np.outer(np.arange(V), np.arange(V)) / V)
        Fd = np.exp(-2j * np.pi * np.outer(np.arange(D), np.arange(D)) / D)
        F = Fv @ M @ Fd.T
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.abs(F) ** 2


# -- entropy / spectrum -------------------------------------------------------

def geo_complexity(dist) -> float:
    """1 - H(D) / log|D|."""
    d = np.asarray(dist, dtype=float).ravel()
    if d.size < 2:
        raise ValueError("need at least two outcomes")
    if (d < 0).any():
        raise ValueError("negative probability mass")
    if abs(d.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {d.sum()!r}, not 1")
    nz = d[d > 0]
    h = -np.sum(nz * np.log(nz))
    return float(1.0 - h / math.log(d.size))


def singular_values(M, tol: float = 1e-10, max_sweeps: int = 200) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi, sorted descending.

    Columns are orthogonalised pairwise by plane rotations until every pair
    satisfies |a_i . a_j| <= tol * |a_i| |a_j|. Raises SvdConvergenceError
    if that does not happen within ``max_sweeps`` sweeps.
    """
    A = np.array(M, dtype=complex if np.iscomplexobj(M) else float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("need a nonempty 2-D matrix")
    if A.shape[0] < A.shape[1]:
        A = A.conj().T
    A = A.copy(order="F")
    n = A.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ai, aj = A[:, i], A[:, j]
                alpha = np.vdot(ai, ai).real
                beta = np.vdot(aj, aj).real
                gamma = np.vdot(ai, aj)
                g = abs(gamma)
                if g == 0.0 or g <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * ai - s * np.conj(phase) * aj
                new_j = s * phase * ai + c * aj
                A[:, i], A[:, j] = new_i, new_j
        if not rotated:
            sv = np.linalg.norm(A, axis=0)
            return np.sort(sv)[::-1]
    raise SvdConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")


def eig_concentration(M) -> tuple[float, float]:
    """Top two eigenvalues of the (uncentred) Gram matrix, rescaled to sum 1."""
    ev = singular_values(M) ** 2
    total = ev.sum()
    if total <= 0:
        raise ValueError("zero matrix has no eigenvalue concentration")
    ev = ev / total
    return float(ev[0]), float(ev[1]) if ev.size > 1 else 0.0


class MatrixNorms(NamedTuple):
    nuclear: float
    stable_rank: float
    effective_rank: float
    spectral_entropy: float


def matrix_norms(M) -> MatrixNorms:
    sv = singular_values(M)
    if sv[0] <= 0:
        raise ValueError("matrix norms are undefined for the zero matrix")
    nuclear = float(sv.sum())
    stable = float(np.sum(sv ** 2) / sv[0] ** 2)
    pr = sv[sv > 0] / nuclear
    h = float(-np.sum(pr * np.log(pr))) + 0.0
    return MatrixNorms(nuclear, stable, math.exp(h), h)
