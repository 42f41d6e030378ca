import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonkit.algebra import Algebra, diagonal_weight, tracial_weight, weight_eval
from poissonkit.moments import (
    MAX_WORD_LENGTH,
    MomentQuery,
    bernoulli_moment,
    characteristic,
    classical_pmf,
    growth_bound_check,
    poisson_moment,
)
from poissonkit.partitions import bell
from conftest import block_dims, draw_instance, random_hermitian, seeds


def test_scalar_unit_moments_are_bell_numbers():
    w = diagonal_weight([1.0])
    one = w.algebra.identity()
    assert poisson_moment(w, [one] * 3) == pytest.approx(5)
    for n in range(6):
        assert poisson_moment(w, [one] * n) == pytest.approx(bell(n))


def test_scalar_moments_are_touchard_polynomials():
    # E[N^n] for N ~ Poisson(lam) via the series
    lam = 1.3
    w = diagonal_weight([lam])
    one = w.algebra.identity()
    for n in range(6):
        series = sum(classical_pmf(lam, k) * k ** n for k in range(80))
        assert poisson_moment(w, [one] * n) == pytest.approx(series, rel=1e-12)


def test_tracial_identity_growth_bound_is_tight():
    w = tracial_weight(Algebra((2,)), 1.0)
    for n in range(1, 6):
        rep = growth_bound_check(w, [w.algebra.identity()] * n)
        assert rep.moment_abs == pytest.approx(bell(n))
        assert rep.bound == pytest.approx(bell(n))
        assert rep.passed


def test_low_order_moments():
    _, w, (x, y) = draw_instance(7, (2,))
    assert poisson_moment(w, []) == 1
    assert poisson_moment(w, [x]) == pytest.approx(weight_eval(w, x))
    expected = weight_eval(w, x @ y) + weight_eval(w, x) * weight_eval(w, y)
    assert poisson_moment(w, [x, y]) == pytest.approx(expected)


@given(seeds, block_dims, st.integers(1, 5))
def test_moment_linear_in_each_letter(seed, dims, n):
    rng, w, letters = draw_instance(seed, dims, n_letters=n + 1)
    z = complex(*rng.normal(size=2))
    word = letters[:n]
    i = int(rng.integers(0, n))
    mixed = word[:i] + [word[i] * z + letters[n]] + word[i + 1:]
    other = word[:i] + [letters[n]] + word[i + 1:]
    expected = z * poisson_moment(w, word) + poisson_moment(w, other)
    assert abs(poisson_moment(w, mixed) - expected) < 1e-10 * max(1, abs(expected))


@given(seeds, block_dims, st.integers(1, 5))
def test_growth_bound(seed, dims, n):
    _, w, letters = draw_instance(seed, dims, n_letters=n, norm=1.7)
    assert growth_bound_check(w, letters).passed


@given(seeds, block_dims, st.integers(1, 4))
def test_moment_adjoint_symmetry(seed, dims, n):
    # phi(lambda(x_1)...lambda(x_n))^* = phi(lambda(x_n^*)...lambda(x_1^*))
    _, w, letters = draw_instance(seed, dims, n_letters=n)
    lhs = poisson_moment(w, letters).conjugate()
    rhs = poisson_moment(w, [x.H for x in reversed(letters)])
    assert abs(lhs - rhs) < 1e-12


def test_characteristic_scalar_is_classical():
    lam, t = 1.7, 0.8
    w = diagonal_weight([lam])
    x = w.algebra.identity() * t
    assert characteristic(w, x) == pytest.approx(cmath.exp(lam * (cmath.exp(1j * t) - 1)), abs=1e-15)


def test_characteristic_rejects_non_hermitian():
    _, w, (x, _) = draw_instance(1, (2,))
    with pytest.raises(ValueError):
        characteristic(w, x)


@given(seeds, block_dims)
def test_characteristic_matches_moment_series(seed, dims):
    rng, w, _ = draw_instance(seed, dims)
    h = random_hermitian(rng, w.algebra, 0.3)
    series = sum((1j) ** n / math.factorial(n) * poisson_moment(w, [h] * n) for n in range(MAX_WORD_LENGTH + 1))
    # remainder of the exponential series at |h| <= 0.3 with mass <= 1.5
    assert abs(characteristic(w, h) - series) < 1e-5


def _bernoulli_bruteforce(w, letters, n):
    total = 0j
    for f in itertools.product(range(n), repeat=len(letters)):
        term = 1.0 + 0j
        for leg in set(f):
            prod = None
            for x, j in zip(letters, f):
                if j == leg:
                    prod = x if prod is None else prod @ x
            term *= weight_eval(w, prod) / n
        total += term
    return total


@pytest.mark.parametrize("n_copies", [1, 2, 3, 5])
def test_bernoulli_matches_tensor_leg_enumeration(n_copies):
    _, w, letters = draw_instance(11, (2,), n_letters=3)
    assert abs(bernoulli_moment(w, letters, n_copies=n_copies) - _bernoulli_bruteforce(w, letters, n_copies)) < 1e-13


def test_bernoulli_converges_at_rate_one_over_n():
    _, w, letters = draw_instance(5, (2,), n_letters=3)
    exact = poisson_moment(w, letters)
    errs = [abs(bernoulli_moment(w, letters, n_copies=n) - exact) for n in (64, 128, 256)]
    for a, b in zip(errs, errs[1:]):
        assert 0.4 <= b / a <= 0.6


def test_query_caps_and_dimensions():
    w = diagonal_weight([1.0, 1.0])
    with pytest.raises(ValueError):
        MomentQuery(w, [w.algebra.identity()] * (MAX_WORD_LENGTH + 1))
    with pytest.raises(ValueError):
        MomentQuery(w, [Algebra((3,)).identity()])
    with pytest.raises(ValueError):
        bernoulli_moment(w, [], n_copies=0)


def test_classical_pmf_values():
    assert classical_pmf(1.7, 2) == pytest.approx(math.exp(-1.7) * 1.7 ** 2 / 2, rel=1e-15)
    assert sum(classical_pmf(4.0, k) for k in range(60)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        classical_pmf(0.0, 1)
    with pytest.raises(ValueError):
        classical_pmf(1.0, -1)
