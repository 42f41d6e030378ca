import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonkit.algebra import weight_eval
from poissonkit.fock import (
    MAX_LETTERS,
    PoissonWord,
    WordKind,
    basis_transform,
    build_word_vector,
    fock_action_residual,
    fock_isometry_check,
    gram_empty,
    gram_empty_via_fock,
    gram_fock,
    gram_matrix,
    oracle_gram,
    transform_round_trip,
    word_inner,
)
from poissonkit.moments import poisson_moment
from poissonkit.partitions import permanent
from conftest import block_dims, draw_instance, seeds

oracle_dims = st.sampled_from([(1,), (2,), (1, 1)])


def _mean_zero(w, x):
    return x - w.algebra.identity() * (weight_eval(w, x) / w.mass)


def test_empty_gram_low_order():
    _, w, (x, y) = draw_instance(3, (2,))
    assert gram_empty([], [], w) == 1
    assert gram_empty([x], [], w) == pytest.approx(weight_eval(w, x.H))
    assert gram_empty([x], [y], w) == pytest.approx(weight_eval(w, x.H @ y) + weight_eval(w, x.H) * weight_eval(w, y))


def test_mean_zero_two_by_two():
    _, w, letters = draw_instance(4, (2,), n_letters=4)
    x1, x2, y1, y2 = (_mean_zero(w, z) for z in letters)
    expected = weight_eval(w, x1.H @ y1) * weight_eval(w, x2.H @ y2) + weight_eval(w, x1.H @ y2) * weight_eval(w, x2.H @ y1)
    assert gram_empty([x1, x2], [y1, y2], w) == pytest.approx(expected, abs=1e-14)
    assert abs(gram_empty([x1, x2], [y1], w)) < 1e-14


@given(seeds, block_dims, st.integers(0, 3), st.integers(0, 3))
def test_three_routes_to_empty_gram(seed, dims, n, m):
    _, w, letters = draw_instance(seed, dims, n_letters=n + m)
    xs, ys = letters[:n], letters[n:]
    a = gram_empty(xs, ys, w)
    assert abs(a - gram_empty_via_fock(xs, ys, w)) < 1e-11
    assert abs(a - word_inner(PoissonWord(WordKind.EMPTY, xs), PoissonWord(WordKind.EMPTY, ys), w)) < 1e-11


@given(seeds, block_dims, st.integers(0, 3), st.integers(0, 3))
def test_fock_gram_quasi_free(seed, dims, n, m):
    _, w, letters = draw_instance(seed, dims, n_letters=n + m)
    xs, ys = letters[:n], letters[n:]
    g = gram_fock(xs, ys, w)
    if n != m:
        assert g == 0
    else:
        P = np.array([[weight_eval(w, x.H @ y) for y in ys] for x in xs], complex).reshape(n, n)
        assert abs(g - permanent(P)) < 1e-12


@given(seeds, block_dims, st.integers(0, 4))
def test_lambda_words_reduce_to_moments(seed, dims, n):
    _, w, letters = draw_instance(seed, dims, n_letters=n)
    inner = word_inner(PoissonWord(WordKind.LAMBDA, ()), PoissonWord(WordKind.LAMBDA, letters), w)
    assert abs(inner - poisson_moment(w, letters)) < 1e-11


@settings(max_examples=8)
@given(seeds, oracle_dims, st.integers(0, 2), st.integers(0, 2), st.sampled_from(list(WordKind)))
def test_closed_form_gram_matches_oracle(seed, dims, n, m, kind):
    _, w, letters = draw_instance(seed, dims, mass=0.8, n_letters=n + m)
    left, right = PoissonWord(kind, letters[:n]), PoissonWord(kind, letters[n:])
    G, M = oracle_gram(w, [left], [right], tol=1e-9)
    assert abs(G[0, 0] - word_inner(left, right, w)) < 1e-9


def test_transform_round_trip_and_inverse_signs():
    _, w, letters = draw_instance(8, (2,), n_letters=3)
    assert transform_round_trip(letters, w) < 1e-12
    fwd = basis_transform("to_empty", letters, w)
    inv = basis_transform("to_fock", letters, w)
    removed_one = [c for s, c in fwd.terms() if len(s) == 2]
    assert np.allclose(removed_one, -np.array([c for s, c in inv.terms() if len(s) == 2]))
    with pytest.raises(ValueError):
        basis_transform("sideways", letters, w)


@settings(max_examples=8)
@given(seeds, oracle_dims, st.integers(0, 2))
def test_action_on_fock_basis(seed, dims, n):
    _, w, letters = draw_instance(seed, dims, mass=0.8, n_letters=n + 1)
    assert fock_action_residual(letters[0], letters[1:], w) < 1e-9


@given(seeds, block_dims)
def test_isometry_onto_symmetric_fock_space(seed, dims):
    rng, w, _ = draw_instance(seed, dims)
    from conftest import random_element

    words = [[random_element(rng, w.algebra) for _ in range(int(rng.integers(0, 4)))] for _ in range(5)]
    rep = fock_isometry_check(words, w)
    assert rep.passed and rep.max_deviation <= 1e-10


def test_gram_matrix_is_hermitian_psd():
    rng, w, letters = draw_instance(21, (2, 1), n_letters=6)
    words = [PoissonWord(WordKind.EMPTY, tuple(letters[i:i + k])) for i, k in [(0, 0), (0, 1), (1, 2), (3, 3), (2, 1)]]
    G = gram_matrix(words, w)
    np.testing.assert_allclose(G, G.conj().T, atol=1e-13)
    assert np.linalg.eigvalsh(G).min() > -1e-12


def test_word_caps_and_missing_level():
    _, w, letters = draw_instance(1, (1,), n_letters=MAX_LETTERS + 1)
    with pytest.raises(ValueError):
        PoissonWord(WordKind.EMPTY, letters)
    with pytest.raises(ValueError):
        build_word_vector(PoissonWord(WordKind.EMPTY, letters[:1]), w)
