"""Poisson moment functional, characteristic functional and finite Bernoulli approximants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, DimensionError, Weight, expi, triple_norm, weight_eval
from .partitions import bell, enumerate_partitions

MAX_WORD_LENGTH = 8


@dataclass(frozen=True)
class MomentQuery:
    """A weight together with an ordered word ``x_1 ... x_n``."""

    weight: Weight
    factors: tuple[AlgebraElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) > MAX_WORD_LENGTH:
            raise ValueError(f"word length {len(self.factors)} exceeds cap {MAX_WORD_LENGTH}")
        for x in self.factors:
            if x.algebra != self.weight.algebra:
                raise DimensionError("factor does not live on the weight's algebra")

    def __len__(self):
        return len(self.factors)


def _as_query(weight_or_query, factors=None) -> MomentQuery:
    if isinstance(weight_or_query, MomentQuery):
        return weight_or_query
    return MomentQuery(weight_or_query, tuple(factors or ()))


def _block_values(q: MomentQuery) -> dict[int, complex]:
    # w(ordered product over A) for every nonempty subset A, keyed by bitmask
    xs = q.factors
    values = {}
    for mask in range(1, 2 ** len(xs)):
        prod = None
        for i, x in enumerate(xs):
            if mask >> i & 1:
                prod = x if prod is None else prod @ x
        values[mask] = weight_eval(q.weight, prod)
    return values


def _partition_terms(q: MomentQuery):
    """Yield ``(|sigma|, prod_A w(prod_{i in A} x_i))`` over all partitions."""
    n = len(q)
    if n == 0:
        yield 0, 1.0 + 0j
        return
    values = _block_values(q)
    for sigma in enumerate_partitions(n):
        term = 1.0 + 0j
        for block in sigma.blocks:
            term *= values[sum(1 << (i - 1) for i in block)]
        yield len(sigma), term


def poisson_moment(weight_or_query, factors: Sequence[AlgebraElement] | None = None) -> complex:
    """``phi_w(lambda(x_1)...lambda(x_n)) = sum_sigma prod_A w(prod_{i in A} x_i)``.

    Accepts either a :class:`MomentQuery` or ``(weight, factors)``.
    """
    q = _as_query(weight_or_query, factors)
    return complex(sum(term for _, term in _partition_terms(q)))


def bernoulli_moment(weight_or_query, factors=None, n_copies: int = 1) -> complex:
    """Moment of the n-fold tensor (Bernoulli) approximant.

    Each partition with ``k`` blocks is weighted by ``n(n-1)...(n-k+1) / n**k``,
    which vanishes for ``k > n``.
    """
    q = _as_query(weight_or_query, factors)
    if n_copies < 1:
        raise ValueError("n_copies must be positive")
    total = 0j
    for k, term in _partition_terms(q):
        if k <= n_copies:
            coeff = math.perm(n_copies, k) / float(n_copies) ** k
            total += coeff * term
    return complex(total)


def characteristic(w: Weight, x: AlgebraElement) -> complex:
    """``phi_w(exp(i lambda(x))) = exp(w(exp(ix) - 1))`` for Hermitian ``x``."""
    if x.algebra != w.algebra:
        raise DimensionError("element does not live on the weight's algebra")
    if not x.is_hermitian(atol=1e-10):
        raise ValueError("characteristic functional needs a Hermitian argument")
    u = expi(x)
    return complex(np.exp(weight_eval(w, u) - w.mass))


@dataclass(frozen=True)
class GrowthReport:
    moment_abs: float
    bound: float
    passed: bool


def growth_bound_check(weight_or_query, factors=None) -> GrowthReport:
    """Compare ``|moment|`` with ``bell(n) * prod |||x_i|||``."""
    q = _as_query(weight_or_query, factors)
    value = abs(poisson_moment(q))
    bound = float(bell(len(q)))
    for x in q.factors:
        bound *= triple_norm(q.weight, x)
    # relative slack covers rounding in the tight case (all factors = 1)
    return GrowthReport(value, bound, value <= bound * (1 + 1e-12) + 1e-14)


def classical_pmf(lambda0: float, k: int) -> float:
    """Poisson probability ``exp(-lambda0) lambda0**k / k!``."""
    if lambda0 <= 0:
        raise ValueError("intensity must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.exp(-lambda0) * lambda0 ** k / math.factorial(k)
