"""Poisson words, the empty and doubly-empty bases, closed-form Grams and the Fock isomorphism.

Three kinds of word vector are supported:

* ``LAMBDA``: ``lambda(x_1) ... lambda(x_n) xi``
* ``EMPTY``: ``lambda_0(x_1, ..., x_n) xi`` defined by the recursion
  ``lambda_0(x_1, ...) = lambda(x_1) lambda_0(x_2, ...) - sum_{i>=2} lambda_0(x_2, .., x_1 x_i, ..)``
* ``FOCK``: the mean-subtracted vectors
  ``lambda_00(x) = sum_{A} prod_{i in A} (-w(x_i)) lambda_0(x_{not A})``

Closed forms are checked against the truncated GNS oracle in :mod:`poissonkit.gns`.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraElement, DimensionError, Weight, weight_eval
from .gns import (
    TruncatedGnsSpace,
    TruncatedGnsVector,
    apply_lambda,
    choose_level_cap,
    MAX_LEVEL,
    TruncationCapError,
    tail_bound,
)
from .partitions import permanent

MAX_LETTERS = 6


class WordKind(enum.Enum):
    LAMBDA = "lambda"
    EMPTY = "empty"
    FOCK = "fock"


@dataclass(frozen=True)
class PoissonWord:
    kind: WordKind
    letters: tuple[AlgebraElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "kind", WordKind(self.kind))
        object.__setattr__(self, "letters", tuple(self.letters))
        if len(self.letters) > MAX_LETTERS:
            raise ValueError(f"word has {len(self.letters)} letters, cap is {MAX_LETTERS}")
        algebras = {x.algebra for x in self.letters}
        if len(algebras) > 1:
            raise DimensionError("letters live on different algebras")

    def __len__(self):
        return len(self.letters)

    def map_letters(self, f: Callable[[AlgebraElement], AlgebraElement]) -> "PoissonWord":
        return PoissonWord(self.kind, tuple(f(x) for x in self.letters))


def _check_letters(w: Weight, letters):
    if len(letters) > MAX_LETTERS:
        raise ValueError(f"{len(letters)} letters exceed cap {MAX_LETTERS}")
    for x in letters:
        if x.algebra != w.algebra:
            raise DimensionError("letter does not live on the weight's algebra")


def _subsets(n: int):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


# --- vectors on the truncated GNS space ------------------------------------------------------


class _WordBuilder:
    """Builds word vectors on one truncated space, memoizing empty-basis vectors."""

    def __init__(self, space: TruncatedGnsSpace):
        self.space = space
        self.xi = space.vacuum()
        self._empty: dict[tuple, TruncatedGnsVector] = {}

    @staticmethod
    def _key(letters) -> tuple:
        return tuple(x.to_vector().tobytes() for x in letters)

    def lam(self, letters) -> TruncatedGnsVector:
        v = self.xi
        for x in reversed(letters):
            v = apply_lambda(x, v)
        return v

    def empty(self, letters) -> TruncatedGnsVector:
        letters = tuple(letters)
        if not letters:
            return self.xi
        key = self._key(letters)
        if key in self._empty:
            return self._empty[key]
        x1, rest = letters[0], letters[1:]
        v = apply_lambda(x1, self.empty(rest))
        for i in range(len(rest)):
            merged = rest[:i] + (x1 @ rest[i],) + rest[i + 1:]
            v = v - self.empty(merged)
        self._empty[key] = v
        return v

    def fock(self, letters) -> TruncatedGnsVector:
        w = self.space.weight
        letters = tuple(letters)
        means = [weight_eval(w, x) for x in letters]
        v = self.space.zero()
        for A in _subsets(len(letters)):
            coeff = np.prod([-means[i] for i in A]) if A else 1.0
            rest = tuple(x for i, x in enumerate(letters) if i not in A)
            v = v + self.empty(rest) * coeff
        return v

    def build(self, word: PoissonWord) -> TruncatedGnsVector:
        if word.kind is WordKind.LAMBDA:
            return self.lam(word.letters)
        if word.kind is WordKind.EMPTY:
            return self.empty(word.letters)
        return self.fock(word.letters)


def build_word_vector(word: PoissonWord, weight_or_space, M: int | None = None) -> TruncatedGnsVector:
    """Vector of ``word`` on the truncated GNS space (given directly or as ``(weight, M)``)."""
    if isinstance(weight_or_space, TruncatedGnsSpace):
        space = weight_or_space
    else:
        if M is None:
            raise ValueError("level cap M is required with a weight")
        space = TruncatedGnsSpace(weight_or_space, M)
    _check_letters(space.weight, word.letters)
    return _WordBuilder(space).build(word)


@dataclass(frozen=True)
class OracleValue:
    value: complex
    level_cap: int
    tail_bound: float
    last_levels: float


def _norm_product(words) -> float:
    out = 1.0
    for word in words:
        for x in word.letters:
            out *= max(x.norm(), 1e-300)
    return out


def oracle_gram(
    weight: Weight,
    left: Sequence[PoissonWord],
    right: Sequence[PoissonWord] | None = None,
    tol: float = 1e-9,
    max_level: int = MAX_LEVEL,
) -> tuple[np.ndarray, int]:
    """Matrix ``<left_i, right_j>`` on the truncated GNS space with the adaptive tail rule.

    ``M`` starts at the smallest level whose analytic tail bound is below ``tol / 10`` and is
    raised by 2 until the top two levels together contribute less than ``tol / 10``.
    """
    right = left if right is None else right
    for word in list(left) + list(right):
        _check_letters(weight, word.letters)
    degree = max(len(a) for a in left) + max(len(b) for b in right)
    norms = max(_norm_product([a]) for a in left) * max(_norm_product([b]) for b in right)
    M = choose_level_cap(weight.mass, degree, norms, tol)
    while True:
        if M > max_level:
            raise TruncationCapError(f"tail rule needs level cap above {max_level}")
        space = TruncatedGnsSpace(weight, M)
        builder = _WordBuilder(space)
        us = [builder.build(a) for a in left]
        vs = us if right is left else [builder.build(b) for b in right]
        G = np.zeros((len(us), len(vs)), complex)
        top = 0.0
        for i, u in enumerate(us):
            for j, v in enumerate(vs):
                levels = u.level_inner(v)
                G[i, j] = levels.sum()
                top = max(top, float(np.abs(levels[-2:]).sum()) if M >= 1 else 0.0)
        if top < tol / 10:
            return G, M
        M += 2


def oracle_inner(weight: Weight, left: PoissonWord, right: PoissonWord, tol: float = 1e-9) -> OracleValue:
    G, M = oracle_gram(weight, [left], [right], tol)
    degree = len(left) + len(right)
    bound = tail_bound(weight.mass, degree, _norm_product([left, right]), M)
    return OracleValue(complex(G[0, 0]), M, bound, float("nan"))


# --- closed forms ------------------------------------------------------------------------------


def _pairing(w: Weight, xs, ys) -> np.ndarray:
    return np.array([[weight_eval(w, x.H @ y) for y in ys] for x in xs], dtype=complex).reshape(len(xs), len(ys))


def gram_empty(xs: Sequence[AlgebraElement], ys: Sequence[AlgebraElement], weight: Weight) -> complex:
    """``<lambda_0(xs) xi, lambda_0(ys) xi>`` as a sum over partial matchings.

    Each matched pair ``(i, j)`` contributes ``w(x_i^* y_j)``, each unmatched ``x_i``
    contributes ``w(x_i^*)`` and each unmatched ``y_j`` contributes ``w(y_j)``.
    """
    _check_letters(weight, xs)
    _check_letters(weight, ys)
    P = _pairing(weight, xs, ys)
    left = [weight_eval(weight, x.H) for x in xs]
    right = [weight_eval(weight, y) for y in ys]
    m = len(ys)

    def rec(i: int, used: int) -> complex:
        if i == len(xs):
            return complex(np.prod([right[j] for j in range(m) if not used >> j & 1]))
        total = left[i] * rec(i + 1, used)
        for j in range(m):
            if not used >> j & 1:
                total += P[i, j] * rec(i + 1, used | 1 << j)
        return total

    return complex(rec(0, 0))


def gram_fock(xs: Sequence[AlgebraElement], ys: Sequence[AlgebraElement], weight: Weight) -> complex:
    """``<lambda_00(xs), lambda_00(ys)> = delta_{nm} perm[w(x_i^* y_j)]``."""
    _check_letters(weight, xs)
    _check_letters(weight, ys)
    if len(xs) != len(ys):
        return 0j
    return permanent(_pairing(weight, xs, ys))


def gram_empty_via_fock(xs, ys, weight: Weight) -> complex:
    """Second route to :func:`gram_empty` through the inverse basis transform and permanents."""
    _check_letters(weight, xs)
    _check_letters(weight, ys)
    mx = [weight_eval(weight, x.H) for x in xs]
    my = [weight_eval(weight, y) for y in ys]
    total = 0j
    for A in _subsets(len(xs)):
        restx = [x for i, x in enumerate(xs) if i not in A]
        ca = np.prod([mx[i] for i in A]) if A else 1.0
        for B in _subsets(len(ys)):
            resty = [y for j, y in enumerate(ys) if j not in B]
            if len(restx) != len(resty):
                continue
            cb = np.prod([my[j] for j in B]) if B else 1.0
            total += ca * cb * gram_fock(restx, resty, weight)
    return complex(total)


def gram_matrix(words: Sequence[PoissonWord], weight: Weight, other: Sequence[PoissonWord] | None = None) -> np.ndarray:
    """Closed-form Gram matrix for words of kind ``EMPTY`` or ``FOCK`` (mixed kinds allowed)."""
    other = words if other is None else other
    G = np.zeros((len(words), len(other)), complex)
    for i, a in enumerate(words):
        for j, b in enumerate(other):
            G[i, j] = word_inner(a, b, weight)
    return G


def word_inner(a: PoissonWord, b: PoissonWord, weight: Weight) -> complex:
    """Closed-form inner product of two words, expanding ``LAMBDA`` and ``FOCK`` words into ``EMPTY`` words."""
    if a.kind is WordKind.FOCK and b.kind is WordKind.FOCK:
        return gram_fock(a.letters, b.letters, weight)
    total = 0j
    for ca, la in empty_expansion(a, weight):
        for cb, lb in empty_expansion(b, weight):
            total += np.conj(ca) * cb * gram_empty(la, lb, weight)
    return complex(total)


def empty_expansion(word: PoissonWord, weight: Weight) -> list[tuple[complex, tuple[AlgebraElement, ...]]]:
    """Write a word as ``sum_k c_k lambda_0(letters_k) xi``."""
    if word.kind is WordKind.EMPTY:
        return [(1.0 + 0j, word.letters)]
    if word.kind is WordKind.FOCK:
        n = len(word.letters)
        means = [weight_eval(weight, x) for x in word.letters]
        out = []
        for A in _subsets(n):
            c = complex(np.prod([-means[i] for i in A])) if A else 1.0 + 0j
            out.append((c, tuple(x for i, x in enumerate(word.letters) if i not in A)))
        return out
    return _lambda_expansion(word.letters)


def _lambda_expansion(letters) -> list[tuple[complex, tuple]]:
    # lambda(x_1) lambda_0(y) = lambda_0(x_1, y) + sum_i lambda_0(.., x_1 y_i, ..)
    terms: list[tuple[complex, tuple]] = [(1.0 + 0j, ())]
    for x in reversed(letters):
        new = []
        for c, ys in terms:
            new.append((c, (x,) + ys))
            for i in range(len(ys)):
                new.append((c, ys[:i] + (x @ ys[i],) + ys[i + 1:]))
        terms = new
    return terms


# --- basis transforms -------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisTransform:
    """Expansion of one word over subwords: ``target(letters) = sum_S coeffs[S] source(letters_S)``."""

    direction: str
    subsets: tuple[tuple[int, ...], ...]
    coefficients: np.ndarray

    def terms(self):
        return list(zip(self.subsets, self.coefficients))


def basis_transform(direction: str, letters: Sequence[AlgebraElement], weight: Weight) -> BasisTransform:
    """Expansion coefficients between the empty and doubly-empty bases.

    ``direction="to_empty"`` expresses ``lambda_00(letters)`` over ``lambda_0`` subwords (signs
    ``(-1)^|A| prod_{A} w(x_i)`` for removed sets ``A``); ``direction="to_fock"`` is the inverse
    (all signs positive).  Subsets index the *kept* letters.
    """
    _check_letters(weight, letters)
    if direction not in ("to_empty", "to_fock"):
        raise ValueError("direction must be 'to_empty' or 'to_fock'")
    sign = -1.0 if direction == "to_empty" else 1.0
    n = len(letters)
    means = [weight_eval(weight, x) for x in letters]
    subsets, coeffs = [], []
    for kept in _subsets(n):
        removed = [i for i in range(n) if i not in kept]
        subsets.append(kept)
        coeffs.append(complex(np.prod([sign * means[i] for i in removed])) if removed else 1.0 + 0j)
    return BasisTransform(direction, tuple(subsets), np.array(coeffs))


def transform_matrix(direction: str, letters, weight: Weight) -> tuple[tuple[tuple[int, ...], ...], np.ndarray]:
    """Matrix of the transform on the span of all subwords of ``letters``.

    Column ``S`` holds the coefficients of the image of the subword on ``S``; the matrix is
    triangular with unit diagonal when subsets are ordered by size.
    """
    n = len(letters)
    subsets = tuple(_subsets(n))
    index = {s: k for k, s in enumerate(subsets)}
    T = np.zeros((len(subsets), len(subsets)), complex)
    for col, S in enumerate(subsets):
        sub = [letters[i] for i in S]
        bt = basis_transform(direction, sub, weight)
        for kept, c in bt.terms():
            T[index[tuple(S[k] for k in kept)], col] = c
    return subsets, T


def transform_round_trip(letters, weight: Weight) -> float:
    """Max-abs deviation of ``to_fock o to_empty`` from the identity on subword coefficients."""
    _, F = transform_matrix("to_empty", letters, weight)
    _, E = transform_matrix("to_fock", letters, weight)
    return float(np.abs(E @ F - np.eye(len(F))).max())


# --- oracle checks ----------------------------------------------------------------------------


def fock_action_residual(x: AlgebraElement, letters: Sequence[AlgebraElement], weight: Weight, M: int | None = None, tol: float = 1e-9) -> float:
    """GNS norm of ``lambda(x) lambda_00(y)`` minus its expansion in the doubly-empty basis.

    The expansion is ``lambda_00(x, y) + sum_i lambda_00(.., x y_i, ..) + w(x) lambda_00(y)
    + sum_i w(x y_i) lambda_00(y without y_i)``, i.e. creation, number-type, mean and
    annihilation parts.  Both sides are level-preserving, so the residual is exact on every
    kept level.
    """
    letters = tuple(letters)
    _check_letters(weight, letters + (x,))
    if M is None:
        # the identity holds level by level; the cap only decides how much of it is seen
        norms = max(x.norm(), 1e-300) ** 2 * _norm_product([PoissonWord(WordKind.LAMBDA, letters)]) ** 2
        M = choose_level_cap(weight.mass, 2 * (len(letters) + 1), norms, tol)
    space = TruncatedGnsSpace(weight, M)
    b = _WordBuilder(space)
    lhs = apply_lambda(x, b.fock(letters))
    rhs = b.fock((x,) + letters) + b.fock(letters) * weight_eval(weight, x)
    for i, y in enumerate(letters):
        rhs = rhs + b.fock(letters[:i] + (x @ y,) + letters[i + 1:])
        rhs = rhs + b.fock(letters[:i] + letters[i + 1:]) * weight_eval(weight, x @ y)
    return (lhs - rhs).norm()


@dataclass(frozen=True)
class IsometryReport:
    closed_form: np.ndarray
    tensor: np.ndarray
    max_deviation: float
    passed: bool


def symmetric_tensor(letters: Sequence[AlgebraElement], weight: Weight) -> np.ndarray:
    """``(1/sqrt(n!)) sum_pi c(x_pi(1)) (x) ... (x) c(x_pi(n))`` with leg coordinates ``c(x) = x d^(1/2)``."""
    sq = weight.sqrt_density().blocks
    legs = [np.concatenate([(b @ s).ravel() for b, s in zip(x.blocks, sq)]) for x in letters]
    D = weight.algebra.dim
    n = len(legs)
    if n == 0:
        return np.ones(1, complex)
    out = np.zeros(D ** n, complex)
    for perm in itertools.permutations(range(n)):
        t = np.ones(1, complex)
        for k in perm:
            t = np.kron(t, legs[k])
        out += t
    return out / math.sqrt(math.factorial(n))


def fock_isometry_check(words: Sequence[Sequence[AlgebraElement]], weight: Weight, tol: float = 1e-10) -> IsometryReport:
    """Compare the doubly-empty Gram with the Gram of symmetric tensors in the Fock space."""
    words = [tuple(w) for w in words]
    for w in words:
        _check_letters(weight, w)
    k = len(words)
    closed = np.array([[gram_fock(a, b, weight) for b in words] for a in words], complex).reshape(k, k)
    tensors = [symmetric_tensor(w, weight) for w in words]
    T = np.zeros((k, k), complex)
    for i, a in enumerate(tensors):
        for j, b in enumerate(tensors):
            if len(a) == len(b) and len(words[i]) == len(words[j]):
                T[i, j] = np.vdot(a, b)
    dev = float(np.abs(closed - T).max()) if k else 0.0
    return IsometryReport(closed, T, dev, dev <= tol)
