import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groklab.complexity import bdm, realify
from groklab.interventions import (Context, DegenerateContextWarning, ablate_support,
                                   closed_form_diagonal_cms, cms_patch, cms_rows_to_csv,
                                   cms_sweep, mode_activations, sample_contexts, shuffle_weights)
from groklab.sfm import rlct_proxy
from groklab.spectral import evaluate, logits
from groklab.tasks import TaskSpec, make_split

P = 13


def diagonal_solution(p=P):
    W = np.zeros((p, p), complex)
    W[1, 1] = 1
    return W


def random_weights(seed, p=P):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))


def ctx(u, v, p=P):
    return Context(u, v, (u + v) % p)


def test_mode_activations_sum_to_hypothesis():
    W = random_weights(0)
    assert mode_activations(W, 3, 8).sum() == pytest.approx(evaluate(W, 3, 8))


def test_cms_same_context_is_zero():
    W = random_weights(1)
    s = ctx(2, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateContextWarning)
        assert cms_patch(W, s, s, [(1, 1), (2, 3)]) == 0.0


def test_cms_warns_on_equal_targets():
    with pytest.warns(DegenerateContextWarning):
        cms_patch(random_weights(2), ctx(1, 2), ctx(2, 1), [(0, 0)])


def test_cms_full_patch_identity():
    W = random_weights(3)
    s1, s2 = ctx(1, 4), ctx(7, 9)
    all_modes = [(k, l) for k in range(P) for l in range(P)]

    def margin(h):
        z = logits(h, P)
        return z[s2.y] - z[s1.y]

    want = margin(evaluate(W, s2.u, s2.v)) - margin(evaluate(W, s1.u, s1.v))
    assert cms_patch(W, s1, s2, all_modes) == pytest.approx(want, abs=1e-9)


def test_cms_closed_form_on_diagonal_solution():
    W = diagonal_solution()
    for s1, s2 in sample_contexts(P, 20, seed=4):
        got = cms_patch(W, s1, s2, [(1, 1)])
        assert got == pytest.approx(closed_form_diagonal_cms(s1.y, s2.y, P), abs=1e-12)
        assert got > 0


@given(st.integers(0, 5000))
@settings(max_examples=30)
def test_cms_set_semantics_and_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    W = random_weights(seed)
    coords = [(int(k), int(l)) for k, l in rng.integers(0, P, size=(8, 2))]
    A, B = coords[:4], coords[4:]
    s1, s2 = ctx(*rng.integers(0, P, 2)), ctx(*rng.integers(0, P, 2))
    if s1.y == s2.y:
        return
    union = set(A) | set(B)
    assert cms_patch(W, s1, s2, A + B + A) == pytest.approx(cms_patch(W, s1, s2, union), abs=1e-12)
    flipped = cms_patch(W, s1._replace(y=s2.y), s2._replace(y=s1.y), union)
    assert flipped == pytest.approx(-cms_patch(W, s1, s2, union), abs=1e-9)


def test_cms_rejects_out_of_range_mode():
    with pytest.raises(ValueError):
        cms_patch(diagonal_solution(), ctx(1, 2), ctx(3, 4), [(P, 0)])


def test_ablate_empty_is_identical_and_copy_semantics():
    split = make_split(TaskSpec(P))
    W = diagonal_solution()
    before = W.copy()
    acc0, acc1 = ablate_support(W, [], split)
    assert acc0 == acc1 == 1.0
    ablate_support(W, [(1, 1)], split)
    assert np.array_equal(W, before)


def test_ablate_full_support_gives_label_zero_rate():
    split = make_split(TaskSpec(P))
    W = diagonal_solution()
    _, after = ablate_support(W, [(1, 1)], split)
    zero_rate = sum(e.y == 0 for e in split.test) / len(split.test)
    assert after == zero_rate


def test_ablate_off_diagonal_of_collapsed_solution_changes_nothing():
    split = make_split(TaskSpec(P))
    off = [(k, l) for k in range(P) for l in range(P) if k != l]
    before, after = ablate_support(diagonal_solution(), off, split)
    assert before == after


def test_shuffle_preserves_multiset_and_support():
    W = random_weights(5) * (np.random.default_rng(6).random((P, P)) < 0.3)
    S = shuffle_weights(W, 9)
    assert np.array_equal(np.sort_complex(W.ravel()), np.sort_complex(S.ravel()))
    assert rlct_proxy(S) == rlct_proxy(W)
    assert np.array_equal(S, shuffle_weights(W, 9))
    assert not np.array_equal(S, shuffle_weights(W, 10))


def test_shuffle_never_lowers_bdm_of_diagonal_solution():
    W = diagonal_solution(29)
    base = bdm(realify(W), 4, 4).value
    wins = sum(bdm(realify(shuffle_weights(W, s)), 4, 4).value >= base for s in range(20))
    assert wins >= 18


def test_cms_sweep_csv():
    W = diagonal_solution(7)
    pairs = sample_contexts(7, 10, seed=1)
    rows = cms_sweep(W, pairs, modes=[(1, 1), (2, 2)])
    assert rows[1].cms_mean == 0.0 and rows[1].cms_std == 0.0
    want = np.mean([closed_form_diagonal_cms(a.y, b.y, 7) for a, b in pairs])
    assert rows[0].cms_mean == pytest.approx(want)
    text = cms_rows_to_csv(rows)
    assert text.splitlines()[0] == "k,l,cms_mean,cms_std"
    assert len(text.splitlines()) == 3
    assert math.isclose(float(text.splitlines()[1].split(",")[2]), rows[0].cms_mean)
