"""Level-truncated GNS representation of the Poisson state.

The Hilbert space is ``sum_{m <= M} N^{(x) m}`` with inner product

    <u, v> = exp(-w(1)) sum_m w^{(x) m}(u_m^* v_m) / m!

Every vector reachable from the vacuum by ``lambda(x)`` and ``Gamma(a)`` is
invariant under permutations of tensor legs, so level ``m`` is stored on the
symmetric subspace in an orthonormal occupation-number basis of dimension
``C(D + m - 1, m)`` where ``D = dim N``.  One tensor leg is ``L2(N, w)`` with
orthonormal coordinates ``a -> a d^(1/2)``; left multiplication by ``x`` is
``kron(x, 1)`` per block.  The scalar ``exp(-w(1)) / m!`` is folded into the
stored amplitudes so that the inner product is a plain ``vdot``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .algebra import AlgebraElement, DimensionError, Weight

# total stored amplitudes per vector
MAX_TOTAL_DIMENSION = 3_000_000
MAX_LEVEL = 60


class TruncationCapError(MemoryError):
    """The symmetric-subspace dimension would exceed the configured cap."""


def symmetric_dimension(D: int, m: int) -> int:
    return math.comb(D + m - 1, m)


def total_dimension(D: int, M: int) -> int:
    return math.comb(D + M, M)


@dataclass(frozen=True, eq=False)
class LevelBasis:
    """Occupation-number basis of ``Sym^m(C^D)`` with ladder index tables."""

    D: int
    m: int
    occ: np.ndarray          # (dim, D) occupation numbers
    sqrt_occ: np.ndarray     # (dim, D) sqrt of occupations
    lower: np.ndarray        # (D, dim) index of occ - e_j in level m-1 (0 where occ_j == 0)
    sorted_keys: np.ndarray
    key_order: np.ndarray
    bits: int

    @property
    def dim(self) -> int:
        return self.occ.shape[0]

    def keys(self, occ: np.ndarray) -> np.ndarray:
        weights = np.left_shift(np.int64(1), self.bits * np.arange(self.D, dtype=np.int64))
        return occ.astype(np.int64) @ weights

    def index_of(self, occ: np.ndarray) -> np.ndarray:
        keys = self.keys(occ)
        pos = np.searchsorted(self.sorted_keys, keys)
        return self.key_order[pos]


def _compositions(D: int, m: int) -> np.ndarray:
    if D == 1:
        return np.array([[m]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(m + D - 1), D - 1)), dtype=np.int64)
    if bars.size == 0:
        bars = bars.reshape(0, D - 1)
    padded = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), m + D - 1)])
    return np.diff(padded, axis=1) - 1


@lru_cache(maxsize=256)
def level_basis(D: int, m: int) -> LevelBasis:
    occ = _compositions(D, m)
    bits = max(1, int(m).bit_length())
    if bits * D > 62:
        raise TruncationCapError(f"cannot index level {m} with {D} modes")
    weights = np.left_shift(np.int64(1), bits * np.arange(D, dtype=np.int64))
    keys = occ @ weights
    order = np.argsort(keys)
    lower = np.zeros((D, len(occ)), dtype=np.int64)
    if m > 0:
        prev = level_basis(D, m - 1)
        for j in range(D):
            rows = np.nonzero(occ[:, j] > 0)[0]
            shifted = occ[rows].copy()
            shifted[:, j] -= 1
            pkeys = shifted @ np.left_shift(np.int64(1), prev.bits * np.arange(D, dtype=np.int64))
            lower[j, rows] = prev.key_order[np.searchsorted(prev.sorted_keys, pkeys)]
    basis = LevelBasis(D, m, occ, np.sqrt(occ), lower, keys[order], order, bits)
    for arr in (basis.occ, basis.sqrt_occ, basis.lower, basis.sorted_keys, basis.key_order):
        arr.setflags(write=False)
    return basis


def _lower(v: np.ndarray, basis: LevelBasis, j: int) -> np.ndarray:
    """Annihilation ``a_j`` from level m to m-1."""
    out = np.zeros(symmetric_dimension(basis.D, basis.m - 1), complex)
    rows = basis.sqrt_occ[:, j] > 0
    out[basis.lower[j, rows]] = basis.sqrt_occ[rows, j] * v[rows]
    return out


def _lower_all(v: np.ndarray, basis: LevelBasis) -> np.ndarray:
    """Stack of ``a_j v`` for every mode, shape ``(D, dim_{m-1})``."""
    rows, target, vals = _lowering_tables(basis.D, basis.m)
    out = np.zeros(basis.D * symmetric_dimension(basis.D, basis.m - 1), complex)
    out[target] = vals * v[rows]
    return out.reshape(basis.D, -1)


@lru_cache(maxsize=256)
def _lowering_tables(D: int, m: int):
    basis = level_basis(D, m)
    prev_dim = symmetric_dimension(D, m - 1)
    rows, modes = np.nonzero(basis.occ > 0)
    target = modes * prev_dim + basis.lower[modes, rows]
    return rows, target, basis.sqrt_occ[rows, modes]


def _raise(w: np.ndarray, basis: LevelBasis, i: int) -> np.ndarray:
    """Creation ``a_i^dagger`` from level m-1 to m."""
    return basis.sqrt_occ[:, i] * w[basis.lower[i]]


def _raise_all(R: np.ndarray, basis: LevelBasis) -> np.ndarray:
    """``sum_i a_i^dagger R[i]`` for a stack ``R`` of level m-1 vectors."""
    gathered = R[np.arange(basis.D)[None, :], basis.lower.T]
    return np.einsum("ki,ki->k", basis.sqrt_occ, gathered)


def second_quantized(L: np.ndarray, v: np.ndarray, basis: LevelBasis) -> np.ndarray:
    """``dGamma(L) v = sum_ij L_ij a_i^dagger a_j v`` on one level."""
    if basis.m == 0:
        return np.zeros_like(v)
    return _raise_all(L @ _lower_all(v, basis), basis)


class TruncatedGnsSpace:
    """Truncated GNS space of the Poisson state for a fixed weight and level cap."""

    def __init__(self, weight: Weight, max_level: int, max_total: int = MAX_TOTAL_DIMENSION):
        if max_level < 0:
            raise ValueError("level cap must be nonnegative")
        if max_level > MAX_LEVEL:
            raise TruncationCapError(f"level cap {max_level} above {MAX_LEVEL}")
        self.weight = weight
        self.algebra = weight.algebra
        self.D = self.algebra.dim
        self.max_level = int(max_level)
        size = total_dimension(self.D, self.max_level)
        if size > max_total:
            raise TruncationCapError(
                f"symmetric subspace of dimension {size} (D={self.D}, M={max_level}) exceeds cap {max_total}"
            )
        self.bases = [level_basis(self.D, m) for m in range(self.max_level + 1)]
        self._sqrt_blocks = weight.sqrt_density().blocks
        self.vacuum_leg = self.leg_vector(self.algebra.identity())
        self.mass = weight.mass

    def leg_vector(self, x: AlgebraElement) -> np.ndarray:
        """Orthonormal coordinates of ``x`` in ``L2(N, w)``."""
        if x.algebra != self.algebra:
            raise DimensionError("element does not live on this space's algebra")
        return np.concatenate([(b @ s).ravel() for b, s in zip(x.blocks, self._sqrt_blocks)])

    def left_matrix(self, x: AlgebraElement) -> np.ndarray:
        """Left multiplication by ``x`` on one leg."""
        if x.algebra != self.algebra:
            raise DimensionError("element does not live on this space's algebra")
        return scipy.linalg.block_diag(*[np.kron(b, np.eye(b.shape[0])) for b in x.blocks])

    def level_prefactor(self, m: int) -> float:
        return math.exp(-0.5 * self.mass - 0.5 * math.lgamma(m + 1))

    def coherent(self, leg: np.ndarray) -> "TruncatedGnsVector":
        """Vector with component ``u^{(x) m}`` on every level, ``u`` given in leg coordinates."""
        leg = np.asarray(leg, dtype=complex)
        levels = []
        for basis in self.bases:
            occ = basis.occ
            amp = np.prod(leg[None, :] ** occ, axis=1)
            amp = amp * np.exp(-0.5 * gammaln(occ + 1).sum(axis=1) + 0.5 * gammaln(basis.m + 1))
            levels.append(amp * self.level_prefactor(basis.m))
        return TruncatedGnsVector(self, tuple(levels), leg=leg)

    def vacuum(self) -> "TruncatedGnsVector":
        return self.coherent(self.vacuum_leg)

    def zero(self) -> "TruncatedGnsVector":
        return TruncatedGnsVector(self, tuple(np.zeros(b.dim, complex) for b in self.bases))

    def vacuum_tail(self) -> float:
        """Norm-squared missing from the truncated vacuum."""
        kept = sum(self.mass ** m / math.factorial(m) for m in range(self.max_level + 1))
        return max(0.0, 1.0 - math.exp(-self.mass) * kept)

    def number_projection(self, v: "TruncatedGnsVector", m: int) -> "TruncatedGnsVector":
        levels = [lv if k == m else np.zeros_like(lv) for k, lv in enumerate(v.levels)]
        return TruncatedGnsVector(self, tuple(levels))


@dataclass(frozen=True, eq=False)
class TruncatedGnsVector:
    space: TruncatedGnsSpace
    levels: tuple[np.ndarray, ...]
    # set when the vector is scale * coherent(leg); lets Gamma act by a single leg map
    leg: np.ndarray | None = None
    scale: complex = 1.0

    def _same(self, other):
        if other.space is not self.space:
            raise DimensionError("vectors belong to different truncated spaces")

    def __add__(self, other):
        self._same(other)
        return TruncatedGnsVector(self.space, tuple(a + b for a, b in zip(self.levels, other.levels)))

    def __sub__(self, other):
        self._same(other)
        return TruncatedGnsVector(self.space, tuple(a - b for a, b in zip(self.levels, other.levels)))

    def __mul__(self, c):
        return TruncatedGnsVector(self.space, tuple(a * c for a in self.levels), self.leg, self.scale * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def level_inner(self, other) -> np.ndarray:
        """Per-level contributions to ``<self, other>``."""
        self._same(other)
        return np.array([np.vdot(a, b) for a, b in zip(self.levels, other.levels)])

    def inner(self, other) -> complex:
        return complex(self.level_inner(other).sum())

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def level_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(a) for a in self.levels])


def vacuum(weight: Weight, max_level: int) -> TruncatedGnsVector:
    return TruncatedGnsSpace(weight, max_level).vacuum()


def apply_lambda(x: AlgebraElement, v: TruncatedGnsVector) -> TruncatedGnsVector:
    """``lambda(x) = sum_j pi_j(x)`` acting levelwise."""
    L = v.space.left_matrix(x)
    levels = tuple(second_quantized(L, lv, b) for lv, b in zip(v.levels, v.space.bases))
    return TruncatedGnsVector(v.space, levels)


def apply_number(v: TruncatedGnsVector) -> TruncatedGnsVector:
    return TruncatedGnsVector(v.space, tuple(lv * b.m for lv, b in zip(v.levels, v.space.bases)))


# --- Gamma(a) = a^{(x) m} on each level -------------------------------------------------------
#
# A = P L Dg U' (pivoted LU, Dg = diag(U), U' unit upper).  L and U' factor into shears
# I + N with N^2 = 0, and Gamma(I + N) = exp(dGamma(N)), a series that terminates on each
# level.  Singular or ill-conditioned A go through the SVD so that only unitaries are
# LU-factored.


def _gamma_program(A: np.ndarray) -> list[tuple]:
    """Factor ``A`` into a list of elementary operations, applied last-to-first."""
    A = np.asarray(A, dtype=complex)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-8 * max(s[0], 1e-300):
        W, s, Vh = np.linalg.svd(A)
        return _gamma_program(W) + [("diag", s.astype(complex))] + _gamma_program(Vh)
    P, L, U = scipy.linalg.lu(A)
    D = A.shape[0]
    prog: list[tuple] = []
    perm = np.argmax(P, axis=0)  # P e_j = e_{perm[j]}
    if not np.array_equal(perm, np.arange(D)):
        prog.append(("perm", perm))
    for k in range(D - 1):
        col = L[:, k].copy()
        col[: k + 1] = 0
        if np.any(col):
            prog.append(("col", k, col))
    diag = np.diag(U).copy()
    if not np.allclose(diag, 1.0, rtol=0, atol=0):
        prog.append(("diag", diag))
    Uunit = U / diag[:, None]
    # U' = U_{D-1} ... U_1 with U_k = I + e_k r_k^T, so U_{D-1} is applied last
    for k in reversed(range(D - 1)):
        row = Uunit[k].copy()
        row[: k + 1] = 0
        if np.any(row):
            prog.append(("row", k, row))
    return prog


def _apply_op(op: tuple, v: np.ndarray, basis: LevelBasis) -> np.ndarray:
    kind = op[0]
    if kind == "diag":
        return v * np.prod(op[1][None, :] ** basis.occ, axis=1)
    if kind == "perm":
        perm = op[1]
        target = np.zeros_like(basis.occ)
        target[:, perm] = basis.occ
        out = np.zeros_like(v)
        out[basis.index_of(target)] = v
        return out
    if basis.m == 0:
        return v.copy()
    k, vec = op[1], op[2]
    total = v.copy()
    term = v
    for r in range(1, basis.m + 1):
        if kind == "col":
            w = _lower(term, basis, k)
            nxt = np.zeros(basis.dim, complex)
            for i in np.nonzero(vec)[0]:
                nxt += vec[i] * _raise(w, basis, i)
        else:
            w = np.zeros(symmetric_dimension(basis.D, basis.m - 1), complex)
            for j in np.nonzero(vec)[0]:
                w += vec[j] * _lower(term, basis, j)
            nxt = _raise(w, basis, k)
        term = nxt / r
        if not np.any(term):
            break
        total = total + term
    return total


def gamma_matrix_action(A: np.ndarray, v: np.ndarray, basis: LevelBasis) -> np.ndarray:
    """``A^{(x) m}`` restricted to the symmetric subspace, applied to one level."""
    out = v
    for op in reversed(_gamma_program(A)):
        out = _apply_op(op, out, basis)
    return out


def apply_gamma(a: AlgebraElement, v: TruncatedGnsVector) -> TruncatedGnsVector:
    """``Gamma(a)``: ``a^{(x) m}`` on level ``m``; exact per level."""
    A = v.space.left_matrix(a)
    if v.leg is not None:
        # a^{(x) m} u^{(x) m} = (a u)^{(x) m}
        return v.space.coherent(A @ v.leg) * v.scale
    program = _gamma_program(A)
    levels = []
    for lv, basis in zip(v.levels, v.space.bases):
        out = lv
        for op in reversed(program):
            out = _apply_op(op, out, basis)
        levels.append(out)
    return TruncatedGnsVector(v.space, tuple(levels))


# --- truncation control -----------------------------------------------------------------------


def tail_bound(mass: float, degree: int, norm_product: float, M: int, terms: int = 400) -> float:
    """Bound on ``sum_{m > M}`` of level contributions to an inner product of degree ``degree``.

    A level-m vector built from ``k`` letters has norm at most
    ``(m + w(1))^k prod ||x_i|| w(1)^(m/2)``; both sides together give the summand.
    """
    total = 0.0
    for m in range(M + 1, M + 1 + terms):
        log_term = degree * math.log(m + mass) + m * math.log(mass) - math.lgamma(m + 1) - mass if mass > 0 else -math.inf
        term = math.exp(log_term) * norm_product
        total += term
        if m > mass + degree and term < 1e-18 * max(total, 1e-300):
            break
    return total


def choose_level_cap(mass: float, degree: int, norm_product: float, tol: float, start: int = 1) -> int:
    """Smallest ``M >= start`` whose analytic tail bound is below ``tol / 10``."""
    M = max(start, 0)
    while tail_bound(mass, degree, norm_product, M) >= tol / 10:
        M += 1
        if M > MAX_LEVEL:
            raise TruncationCapError(f"tail bound not reached below level {MAX_LEVEL}")
    return M
