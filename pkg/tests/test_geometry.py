import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groklab.geometry import (Bar, betti1_max_lifetime, circular_correlation,
                              farthest_point_subsample, homomorphism_error, operand_embedding,
                              pca_project, ring_angles, vietoris_rips_persistence)
from groklab.complexity import realify
from groklab.tasks import is_prime

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def ring(n, r=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return r * np.c_[np.cos(t), np.sin(t)]


def random_rotation(d, seed):
    Q, R = np.linalg.qr(np.random.default_rng(seed).standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


# -- PCA ----------------------------------------------------------------------

def test_pca_two_point_cloud():
    x = np.array([3.0, -4.0])
    proj, var = pca_project(np.stack([-x, x]), 1)
    assert var[0] == pytest.approx(25.0)
    assert np.abs(proj[:, 0]).tolist() == pytest.approx([5.0, 5.0])


def test_pca_affine_subspace_reconstruction():
    rng = np.random.default_rng(3)
    basis = np.linalg.qr(rng.standard_normal((6, 2)))[0]
    X = rng.standard_normal((30, 2)) @ basis.T + rng.standard_normal(6)
    proj, _ = pca_project(X, 2)
    centred = X - X.mean(axis=0)
    # recover axes by least squares and reconstruct
    axes = np.linalg.lstsq(proj, centred, rcond=None)[0]
    assert np.abs(proj @ axes - centred).max() <= 1e-8


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_pca_matches_dense_eigensolver(seed):
    X = np.random.default_rng(seed).standard_normal((20, 5)) * [3, 2, 1.5, 1, 0.5]
    _, var = pca_project(X, 5)
    C = np.cov(X.T, bias=True)
    assert np.allclose(var, np.sort(np.linalg.eigvalsh(C))[::-1], atol=1e-8)
    assert np.all(np.diff(var) <= 1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_pca_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((25, 4)) * [4, 2, 1, 0.3]
    _, v1 = pca_project(X, 3)
    _, v2 = pca_project(X @ random_rotation(4, seed + 1).T + 5.0, 3)
    assert np.allclose(v1, v2, atol=1e-8)


def test_pca_sign_convention():
    X = np.random.default_rng(0).standard_normal((15, 3))
    proj, _ = pca_project(X, 2)
    Xc = X - X.mean(axis=0)
    axes = np.linalg.lstsq(Xc, proj, rcond=None)[0]
    for a in axes.T:
        first = a[np.flatnonzero(np.abs(a) > 1e-9)[0]]
        assert first > 0


def test_pca_errors():
    with pytest.raises(ValueError):
        pca_project(np.ones((5, 3)), 1)
    with pytest.raises(ValueError):
        pca_project(np.random.default_rng(0).standard_normal((4, 3)), 4)


# -- ring diagnostics ---------------------------------------------------------

@pytest.mark.parametrize("p", [5, 13, 31])
def test_circular_correlation_exact_and_reversed(p):
    phi = 2 * np.pi * np.arange(p) / p
    assert circular_correlation(phi, p) == pytest.approx(1.0, abs=1e-9)
    assert circular_correlation(-phi, p) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(-10, 10))
def test_circular_correlation_offset_invariant(c):
    p = 17
    theta = np.random.default_rng(1).uniform(0, 2 * np.pi, p)
    assert circular_correlation(theta + c, p) == pytest.approx(circular_correlation(theta, p), abs=1e-9)


def test_circular_correlation_random_angles_small():
    p = 97
    vals = [circular_correlation(np.random.default_rng(s).uniform(0, 2 * np.pi, p), p)
            for s in range(200)]
    assert np.mean(np.array(vals) < 0.3) >= 0.99


def test_circular_correlation_needs_three_points():
    with pytest.raises(ValueError):
        circular_correlation([0.0, 1.0], 2)


@pytest.mark.parametrize("p", [p for p in range(3, 32) if is_prime(p)])
def test_characters_are_homomorphisms(p):
    for k in range(p):
        psi = np.exp(2j * np.pi * k * np.arange(p) / p)
        assert homomorphism_error(psi, p) <= 1e-9


def test_homomorphism_error_small_perturbation():
    p = 23
    eps = np.random.default_rng(0).uniform(-0.01, 0.01, p)
    psi = np.exp(2j * np.pi * np.arange(p) / p + 1j * eps)
    assert homomorphism_error(psi, p) <= 0.03
    assert homomorphism_error(lambda x: 3.0 * psi[x], p) == pytest.approx(homomorphism_error(psi, p))


def test_homomorphism_error_rejects_zero():
    with pytest.raises(ValueError, match="x=2"):
        homomorphism_error([1, 1, 0, 1, 1], 5)


def test_trained_embedding_is_a_ring():
    p = 13
    W = np.zeros((p, p), complex)
    W[1, 1] = 1
    cloud = realify(operand_embedding(W))
    assert circular_correlation(ring_angles(cloud), p) == pytest.approx(1.0, abs=1e-9)


# -- persistence --------------------------------------------------------------

def test_square_barcode():
    h1 = [b for b in vietoris_rips_persistence(SQUARE) if b.dim == 1]
    assert len(h1) == 1
    assert h1[0].birth == pytest.approx(1.0, abs=1e-9)
    assert h1[0].death == pytest.approx(math.sqrt(2), abs=1e-9)
    assert betti1_max_lifetime(SQUARE) == pytest.approx(math.sqrt(2) - 1)


def test_equilateral_triangle_has_no_loop():
    s = 2.0
    tri = np.array([[0, 0], [s, 0], [s / 2, s * math.sqrt(3) / 2]])
    bars = vietoris_rips_persistence(tri)
    assert not [b for b in bars if b.dim == 1]
    assert sum(1 for b in bars if b.dim == 0 and math.isinf(b.death)) == 1


def test_ring_has_one_dominant_loop():
    h1 = sorted((b.lifetime for b in vietoris_rips_persistence(ring(20)) if b.dim == 1), reverse=True)
    assert len(h1) >= 1
    runner_up = h1[1] if len(h1) > 1 else 0.0
    assert h1[0] >= 5 * runner_up


def test_collinear_points_have_no_loop():
    pts = np.c_[np.arange(10.0), 2 * np.arange(10.0)]
    assert betti1_max_lifetime(pts) == 0.0


def test_gaussian_cloud_loop_much_shorter_than_ring():
    g = np.random.default_rng(0).standard_normal((50, 3))
    assert 3 * betti1_max_lifetime(g) <= betti1_max_lifetime(ring(20))


def test_h0_counts_components():
    pts = np.vstack([ring(6), ring(6) + 10.0])
    h0 = [b for b in vietoris_rips_persistence(pts) if b.dim == 0]
    assert sum(math.isinf(b.death) for b in h0) == 1
    assert len(h0) == 12
    assert max(b.death for b in h0 if math.isfinite(b.death)) > 5


def test_brute_force_reduction_agrees():
    """Dense GF(2) reduction over the full 2-skeleton on a tiny cloud."""
    X = np.random.default_rng(5).standard_normal((7, 2))
    n = len(X)
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    edges = sorted(itertools.combinations(range(n), 2), key=lambda e: (D[e], e))
    eidx = {e: i for i, e in enumerate(edges)}
    tris = sorted(itertools.combinations(range(n), 3),
                  key=lambda t: (max(D[t[0], t[1]], D[t[0], t[2]], D[t[1], t[2]]),
                                 max(eidx[(t[0], t[1])], eidx[(t[0], t[2])], eidx[(t[1], t[2])])))
    B = np.zeros((len(edges), len(tris)), dtype=np.uint8)
    for j, (a, b, c) in enumerate(tris):
        for e in ((a, b), (a, c), (b, c)):
            B[eidx[e], j] = 1
    lows = {}
    bars = []
    for j in range(B.shape[1]):
        while B[:, j].any():
            low = int(np.flatnonzero(B[:, j])[-1])
            if low not in lows:
                lows[low] = j
                t = tris[j]
                death = max(D[t[0], t[1]], D[t[0], t[2]], D[t[1], t[2]])
                if death > D[edges[low]]:
                    bars.append((D[edges[low]], death))
                break
            B[:, j] ^= B[:, lows[low]]
    ours = sorted((b.birth, b.death) for b in vietoris_rips_persistence(X) if b.dim == 1)
    assert np.allclose(sorted(bars), ours)


@given(st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_persistence_isometry_and_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((12, 3))
    base = vietoris_rips_persistence(X)
    moved = X[rng.permutation(12)] @ random_rotation(3, seed).T + rng.standard_normal(3)
    other = vietoris_rips_persistence(moved)
    assert len(base) == len(other)
    for a, b in zip(base, other):
        assert a.dim == b.dim
        assert a.birth == pytest.approx(b.birth, abs=1e-9)
        assert a.death == pytest.approx(b.death, abs=1e-9) or (math.isinf(a.death) and math.isinf(b.death))


def test_point_cap_and_subsampling():
    X = np.random.default_rng(0).standard_normal((300, 2))
    with pytest.raises(ValueError, match="subsample"):
        vietoris_rips_persistence(X)
    idx = farthest_point_subsample(X, 40)
    assert len(set(idx.tolist())) == 40
    vietoris_rips_persistence(X[idx])


def test_bar_lifetime():
    assert Bar(1, 0.5, 2.0).lifetime == 1.5
