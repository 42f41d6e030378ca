import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonkit.algebra import Algebra, diagonal_weight, expi, weight_eval
from poissonkit.gns import (
    TruncatedGnsSpace,
    TruncatedGnsVector,
    TruncationCapError,
    apply_gamma,
    apply_lambda,
    apply_number,
    choose_level_cap,
    level_basis,
    symmetric_dimension,
    tail_bound,
    total_dimension,
    vacuum,
)
from poissonkit.moments import classical_pmf, poisson_moment
from conftest import draw_instance, random_hermitian, seeds

small_dims = st.sampled_from([(1,), (2,), (1, 1)])


def _random_vector(space, rng):
    levels = tuple(rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim) for b in space.bases)
    return TruncatedGnsVector(space, levels)


def test_level_dimensions():
    for D, m in [(1, 5), (4, 3), (5, 4)]:
        assert level_basis(D, m).dim == symmetric_dimension(D, m) == math.comb(D + m - 1, m)
    assert sum(symmetric_dimension(4, m) for m in range(6)) == total_dimension(4, 5)


@pytest.mark.parametrize("lam", [0.5, 1.7, 4.0])
def test_scalar_vacuum_levels_are_poisson(lam):
    xi = vacuum(diagonal_weight([lam]), 20)
    np.testing.assert_allclose(xi.level_norms() ** 2, [classical_pmf(lam, k) for k in range(21)], atol=1e-14)


def test_vacuum_norm_and_tail():
    space = TruncatedGnsSpace(diagonal_weight([0.4, 0.3]), 8)
    xi = space.vacuum()
    assert xi.norm() ** 2 + space.vacuum_tail() == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=10)
@given(seeds, small_dims, st.integers(1, 3))
def test_lambda_word_matches_moment(seed, dims, n):
    _, w, letters = draw_instance(seed, dims, mass=0.8, n_letters=n)
    M = choose_level_cap(w.mass, n, 1.0, 1e-10)
    space = TruncatedGnsSpace(w, M)
    v = space.vacuum()
    for x in reversed(letters):
        v = apply_lambda(x, v)
    assert abs(space.vacuum().inner(v) - poisson_moment(w, letters)) < 1e-9


@settings(max_examples=10)
@given(seeds, small_dims)
def test_gamma_vacuum_expectation(seed, dims):
    rng, w, (a, _) = draw_instance(seed, dims, mass=0.7)
    space = TruncatedGnsSpace(w, 30)
    xi = space.vacuum()
    expected = np.exp(weight_eval(w, a) - w.mass)
    general = xi.inner(apply_gamma(a, TruncatedGnsVector(space, xi.levels)))
    coherent = xi.inner(apply_gamma(a, xi))
    assert abs(general - expected) < 1e-12
    assert abs(coherent - expected) < 1e-12


def test_gamma_singular_argument():
    w = diagonal_weight([0.3, 0.5])
    p = Algebra((2,)).element([np.array([[1.0, 1.0], [0.0, 0.0]])])
    space = TruncatedGnsSpace(w, 25)
    xi = space.vacuum()
    value = xi.inner(apply_gamma(p, TruncatedGnsVector(space, xi.levels)))
    assert abs(value - np.exp(weight_eval(w, p) - w.mass)) < 1e-12


@settings(max_examples=8)
@given(seeds)
def test_gamma_is_multiplicative_and_unitary_on_unitaries(seed):
    rng, w, (a, b) = draw_instance(seed, (2,), mass=0.6)
    space = TruncatedGnsSpace(w, 4)
    v = _random_vector(space, rng)
    lhs = apply_gamma(a, apply_gamma(b, v))
    rhs = apply_gamma(a @ b, v)
    assert (lhs - rhs).norm() < 1e-10 * max(1.0, v.norm())
    u = expi(random_hermitian(rng, w.algebra))
    assert apply_gamma(u, v).norm() == pytest.approx(v.norm(), rel=1e-12)


def test_exponential_of_lambda_is_gamma_of_exponential(rng):
    # exp(i lambda(x)) = Gamma(exp(ix)) on each level, lambda assembled column by column
    w = diagonal_weight([0.5, 0.3])
    x = random_hermitian(rng, w.algebra, 0.8)
    space = TruncatedGnsSpace(w, 4)
    m = 3
    basis = space.bases[m]
    L = np.zeros((basis.dim, basis.dim), complex)
    for j in range(basis.dim):
        levels = [np.zeros(b.dim, complex) for b in space.bases]
        levels[m][j] = 1.0
        L[:, j] = apply_lambda(x, TruncatedGnsVector(space, tuple(levels))).levels[m]
    v = rng.normal(size=basis.dim) + 0j
    levels = [np.zeros(b.dim, complex) for b in space.bases]
    levels[m] = v
    gamma = apply_gamma(expi(x), TruncatedGnsVector(space, tuple(levels))).levels[m]
    np.testing.assert_allclose(scipy.linalg.expm(1j * L) @ v, gamma, atol=1e-12)


def test_number_operator_counts_levels():
    space = TruncatedGnsSpace(diagonal_weight([1.0]), 6)
    xi = space.vacuum()
    mean = xi.inner(apply_number(xi)).real / xi.norm() ** 2
    assert mean == pytest.approx(1.0, abs=1e-3)
    one = space.algebra.identity()
    # lambda(1) is the number operator
    assert (apply_lambda(one, xi) - apply_number(xi)).norm() < 1e-14


def test_caps_raise():
    w = diagonal_weight([0.2] * 3)
    with pytest.raises(TruncationCapError):
        TruncatedGnsSpace(w, 100)
    with pytest.raises(TruncationCapError):
        TruncatedGnsSpace(w, 20, max_total=1000)
    with pytest.raises(ValueError):
        TruncatedGnsSpace(w, -1)


def test_tail_bound_monotone_and_cap_meets_tolerance():
    bounds = [tail_bound(1.0, 4, 1.0, M) for M in range(5, 20)]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    M = choose_level_cap(1.0, 4, 1.0, 1e-9)
    assert tail_bound(1.0, 4, 1.0, M) < 1e-10 <= tail_bound(1.0, 4, 1.0, M - 1)


def test_vectors_from_different_spaces_do_not_mix():
    a = vacuum(diagonal_weight([1.0]), 3)
    b = vacuum(diagonal_weight([1.0]), 3)
    with pytest.raises(ValueError):
        a.inner(b)
