"""Characters of Z_p, rank-1 spectral inputs, and the SFM readout.

The hypothesis is the un-conjugated sum

    h(u, v; W) = sum_{k,l} W[k, l] * chi_k(u) * chi_l(v),

targets are encoded as chi_1(y), and class scores are
``logit_c = Re(h * conj(chi_1(c)))``.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def character(k: int, x: int, p: int) -> complex:
    # reduce k*x mod p first so the angle stays in [0, 2*pi)
    return complex(np.exp(1j * TWO_PI * ((k * x) % p) / p))


def character_vector(x: int, p: int) -> np.ndarray:
    """[chi_0(x), ..., chi_{p-1}(x)]."""
    k = np.arange(p)
    return np.exp(1j * TWO_PI * ((k * x) % p) / p)


def character_table(p: int) -> np.ndarray:
    """Matrix C with C[x, k] = chi_k(x)."""
    idx = np.arange(p)
    return np.exp(1j * TWO_PI * (np.outer(idx, idx) % p) / p)


def spectral_input(u: int, v: int, p: int) -> np.ndarray:
    return np.outer(character_vector(u, p), character_vector(v, p))


def evaluate(W: np.ndarray, u: int, v: int) -> complex:
    p = W.shape[0]
    return complex(character_vector(u, p) @ W @ character_vector(v, p))


def evaluate_many(W: np.ndarray, us, vs) -> np.ndarray:
    """Vectorised ``evaluate`` for equal-length operand arrays."""
    p = W.shape[0]
    C = character_table(p)
    us = np.asarray(us, dtype=int)
    vs = np.asarray(vs, dtype=int)
    return np.einsum("ik,kl,il->i", C[us], W, C[vs])


def evaluate_grid(W: np.ndarray) -> np.ndarray:
    """h(u, v) for every (u, v) in Z_p x Z_p, via the inverse 2-D FFT."""
    p = W.shape[0]
    return (p * p) * np.fft.ifft2(W)


def encode_target(y: int, p: int) -> complex:
    return character(1, y, p)


def logits(h: complex, p: int) -> np.ndarray:
    return np.real(h * np.conj(character_vector(1, p)))


def decode(h: complex, p: int) -> int:
    # np.argmax returns the first maximum, i.e. the smallest class index
    return int(np.argmax(logits(h, p)))


def decode_many(h: np.ndarray, p: int) -> np.ndarray:
    scores = np.real(np.asarray(h)[..., None] * np.conj(character_vector(1, p)))
    return np.argmax(scores, axis=-1)


def primitive_root(p: int) -> int:
    """Smallest generator of Z_p^x, found by brute force."""
    if p == 2:
        return 1
    for g in range(2, p):
        x, seen = 1, set()
        for _ in range(p - 1):
            x = (x * g) % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise ValueError(f"no primitive root modulo {p}; is it prime?")


def discrete_log_reindex(p: int) -> dict[int, int]:
    """Map x = g**j -> j on {1, ..., p-1} for the smallest primitive root g."""
    g = primitive_root(p)
    table, x = {}, 1
    for j in range(p - 1):
        table[x] = j
        x = (x * g) % p
    return table
