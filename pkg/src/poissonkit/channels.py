"""Linear maps between algebras and their lifts to Poisson words.

A map is stored as a matrix acting on the row-major block coordinates of
:meth:`AlgebraElement.to_vector`.  Two letterwise lifts are provided:

* ``"hilbert"``: ``lambda_0(x) xi -> lambda_0(T x) xi``, the second quantization of
  ``x^ -> (Tx)^``; Gram-preserving for weight-preserving homomorphisms and a
  contraction for weight-preserving UCP maps.
* ``"predual"``: ``lambda_0(x) d -> lambda_0(T^ x) d`` with the dual map ``T^`` defined by
  ``w_M(T(x) y) = w_N(x T^(y))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement, DimensionError, Weight, expi, weight_eval
from .fock import PoissonWord, WordKind, _WordBuilder, gram_empty, gram_matrix, oracle_gram
from .gns import TruncatedGnsSpace, TruncatedGnsVector, apply_gamma, choose_level_cap
from .moments import characteristic, poisson_moment

CENTRALIZER_TOL = 1e-12


class MissingDualError(ValueError):
    """A predual lift was requested for a map without a declared dual."""


@dataclass(frozen=True, eq=False)
class LinearMapOnAlgebra:
    src: Algebra
    dst: Algebra
    matrix: np.ndarray
    dual: "LinearMapOnAlgebra | None" = None
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dst.dim, self.src.dim):
            raise DimensionError(f"matrix shape {m.shape} does not match {self.dst.dim}x{self.src.dim}")
        object.__setattr__(self, "matrix", m)

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra != self.src:
            raise DimensionError(f"map expects algebra {self.src.blocks}, got {x.algebra.blocks}")
        return self.dst.from_vector(self.matrix @ x.to_vector())

    def compose(self, other: "LinearMapOnAlgebra") -> "LinearMapOnAlgebra":
        """``self o other``."""
        if other.dst != self.src:
            raise DimensionError("maps are not composable")
        return LinearMapOnAlgebra(other.src, self.dst, self.matrix @ other.matrix)

    def with_dual(self, dual: "LinearMapOnAlgebra") -> "LinearMapOnAlgebra":
        if dual.src != self.dst or dual.dst != self.src:
            raise DimensionError("dual must map the target back to the source")
        return LinearMapOnAlgebra(self.src, self.dst, self.matrix, dual, self.name)

    # --- constructors

    @classmethod
    def from_function(cls, src: Algebra, dst: Algebra, f: Callable[[AlgebraElement], AlgebraElement], name: str = ""):
        cols = [f(e).to_vector() for e in src.basis()]
        return cls(src, dst, np.stack(cols, axis=1), None, name)

    @classmethod
    def identity(cls, alg: Algebra):
        return cls(alg, alg, np.eye(alg.dim), None, "identity")

    @classmethod
    def unitary_conjugation(cls, u: AlgebraElement):
        """``x -> u x u^*``."""
        return cls.from_function(u.algebra, u.algebra, lambda x: u @ x @ u.H, "unitary")

    @classmethod
    def kraus(cls, src: Algebra, dst: Algebra, ops: Sequence[np.ndarray]):
        """``x -> sum_k K_k^* x K_k`` on full matrices; ``K_k`` has shape ``(src.size, dst.size)``."""
        ops = [np.asarray(k, dtype=complex) for k in ops]
        for k in ops:
            if k.shape != (src.size, dst.size):
                raise DimensionError(f"Kraus operator shape {k.shape}, expected {(src.size, dst.size)}")

        def f(x):
            full = sum(k.conj().T @ x.to_full() @ k for k in ops)
            y = dst.from_full(full)
            if np.abs(full - y.to_full()).max() > 1e-12:
                raise ValueError("Kraus map leaves the block-diagonal target algebra")
            return y

        return cls.from_function(src, dst, f, "kraus")

    @classmethod
    def compression(cls, alg: Algebra, projections: Sequence[AlgebraElement]):
        """``x -> sum_i p_i x p_i`` for orthogonal projections summing to 1 (a conditional expectation)."""
        total = alg.zeros()
        for p in projections:
            total = total + p
        if not total.allclose(alg.identity(), atol=1e-12):
            raise ValueError("projections must sum to the identity")
        m = cls.from_function(alg, alg, lambda x: sum((p @ x @ p for p in projections), alg.zeros()), "compression")
        return m.with_dual(m)

    @classmethod
    def block_embedding(cls, src: Algebra, dst: Algebra, placement: Sequence[int]):
        """Place block ``k`` of ``src`` into block ``placement[k]`` of ``dst`` (other blocks zero).

        Blocks of ``dst`` not listed receive 0, so the map is non-unital unless every block is hit.
        """
        if len(placement) != len(src.blocks):
            raise DimensionError("one target block per source block")
        for k, j in enumerate(placement):
            if dst.blocks[j] != src.blocks[k]:
                raise DimensionError("embedded blocks must have equal size")

        def f(x):
            out = [np.zeros((d, d), complex) for d in dst.blocks]
            for k, j in enumerate(placement):
                out[j] = out[j] + x.blocks[k]
            return dst.element(out)

        return cls.from_function(src, dst, f, "embedding")

    # --- properties

    def is_unital(self, tol: float = 1e-12) -> bool:
        return self(self.src.identity()).allclose(self.dst.identity(), atol=tol)

    def choi_matrices(self) -> list[np.ndarray]:
        """One Choi matrix ``sum_ij E_ij (x) T(E_ij)`` per source block."""
        out = []
        pos = 0
        for d in self.src.blocks:
            C = np.zeros((d * self.dst.size, d * self.dst.size), complex)
            for i in range(d):
                for j in range(d):
                    vec = np.zeros(self.src.dim, complex)
                    vec[pos + i * d + j] = 1.0
                    img = self.dst.from_vector(self.matrix @ vec).to_full()
                    n = self.dst.size
                    C[i * n:(i + 1) * n, j * n:(j + 1) * n] = img
            out.append(C)
            pos += d * d
        return out

    def cp_defect(self) -> float:
        """Most negative Choi eigenvalue (0 when completely positive)."""
        worst = 0.0
        for C in self.choi_matrices():
            worst = min(worst, float(np.linalg.eigvalsh((C + C.conj().T) / 2).min()))
        return max(0.0, -worst)

    def is_completely_positive(self, tol: float = 1e-10) -> bool:
        return self.cp_defect() <= tol

    def is_positive(self, trials: int = 64, seed: int = 0, tol: float = 1e-10) -> bool:
        # implied by CP; for non-CP maps a randomized check on rank-one projections
        if self.is_completely_positive(tol):
            return True
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            blocks = []
            for d in self.src.blocks:
                v = rng.normal(size=d) + 1j * rng.normal(size=d)
                blocks.append(np.outer(v, v.conj()))
            y = self(self.src.element(blocks))
            if min(np.linalg.eigvalsh((b + b.conj().T) / 2).min() for b in y.blocks) < -tol:
                return False
        return True

    def homomorphism_defect(self) -> float:
        basis = self.src.basis()
        worst = 0.0
        for a in basis:
            worst = max(worst, (self(a.H) - self(a).H).norm())
            for b in basis:
                worst = max(worst, (self(a @ b) - self(a) @ self(b)).norm())
        return worst

    def is_homomorphism(self, tol: float = 1e-10) -> bool:
        return self.homomorphism_defect() <= tol

    def flags(self) -> dict:
        return {
            "unital": self.is_unital(),
            "positive": self.is_positive(),
            "completely_positive": self.is_completely_positive(),
            "homomorphism": self.is_homomorphism(),
        }


def pairing_matrix(w: Weight) -> np.ndarray:
    """``G[a, b] = w(E_a E_b)`` over matrix units."""
    basis = w.algebra.basis()
    return np.array([[weight_eval(w, a @ b) for b in basis] for a in basis])


def dual_map(T: LinearMapOnAlgebra, w_src: Weight, w_dst: Weight) -> LinearMapOnAlgebra:
    """The map ``T^: dst -> src`` with ``w_dst(T(x) y) = w_src(x T^(y))``."""
    if w_src.algebra != T.src or w_dst.algebra != T.dst:
        raise DimensionError("weights do not match the map")
    Gs = pairing_matrix(w_src)
    Gd = pairing_matrix(w_dst)
    # w_dst(T(E_a) E_b) = (T^T Gd)[a, b]; w_src(E_a T^(E_b)) = (Gs That)[a, b]
    That = np.linalg.solve(Gs, T.matrix.T @ Gd)
    return LinearMapOnAlgebra(T.dst, T.src, That, None, f"dual({T.name})")


def check_weight_preserving(T: LinearMapOnAlgebra, w_src: Weight, w_dst: Weight) -> float:
    """``max_a |w_dst(T(E_a)) - w_src(E_a)|`` over matrix units."""
    if w_src.algebra != T.src or w_dst.algebra != T.dst:
        raise DimensionError("weights do not match the map")
    return float(max(abs(weight_eval(w_dst, T(e)) - weight_eval(w_src, e)) for e in T.src.basis()))


def lift_on_words(
    T: LinearMapOnAlgebra,
    word: PoissonWord,
    mode: str = "hilbert",
    weights: tuple[Weight, Weight] | None = None,
    tol: float = 1e-10,
) -> PoissonWord:
    """Letterwise lift of ``T`` to a word (see the module docstring for the two modes).

    With ``weights=(w_src, w_dst)`` the map is first checked to be weight-preserving.
    """
    if weights is not None:
        res = check_weight_preserving(T, *weights)
        if res > tol:
            raise ValueError(f"map is not weight-preserving (residual {res:.3e})")
    if mode == "hilbert":
        return word.map_letters(T)
    if mode == "predual":
        if T.dual is None:
            raise MissingDualError("predual lift needs a declared dual map")
        return word.map_letters(T.dual)
    raise ValueError("mode must be 'hilbert' or 'predual'")


# --- corners ----------------------------------------------------------------------------------


def _check_projection(w: Weight, e: AlgebraElement, tol: float = CENTRALIZER_TOL):
    if not (e @ e).allclose(e, atol=1e-10) or not e.is_hermitian(atol=1e-10):
        raise ValueError("e must be an orthogonal projection")
    comm = (e @ w.density - w.density @ e).norm()
    if comm > tol:
        raise ValueError(f"projection is not in the centralizer (commutator {comm:.3e})")


def corner_project(e: AlgebraElement, word: PoissonWord, weight: Weight) -> list[tuple[complex, PoissonWord]]:
    """Expansion of ``Gamma(E_e) lambda_0(x)`` over empty-basis words in the corner ``eNe``.

    ``sum_{A} prod_{i not in A} w((1-e) x_i) lambda_0(e x_j e: j in A)``.
    """
    if word.kind is not WordKind.EMPTY:
        raise ValueError("corner projection is defined on empty-basis words")
    _check_projection(weight, e)
    one_minus = weight.algebra.identity() - e
    xs = word.letters
    out = []
    for r in range(len(xs) + 1):
        for A in itertools.combinations(range(len(xs)), r):
            coeff = complex(np.prod([weight_eval(weight, one_minus @ xs[i]) for i in range(len(xs)) if i not in A]))
            out.append((coeff, PoissonWord(WordKind.EMPTY, tuple(e @ xs[j] @ e for j in A))))
    return out


def corner_basis(e: AlgebraElement) -> list[AlgebraElement]:
    """A basis of ``eNe`` (matrix units in the range of ``e``, blockwise)."""
    alg = e.algebra
    out = []
    for k, b in enumerate(e.blocks):
        evals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
        Q = vecs[:, evals > 0.5]
        for i in range(Q.shape[1]):
            for j in range(Q.shape[1]):
                blocks = [np.zeros((d, d), complex) for d in alg.blocks]
                blocks[k] = np.outer(Q[:, i], Q[:, j].conj())
                out.append(alg.element(blocks))
    return out


@dataclass(frozen=True)
class CornerProjectionReport:
    residual: float
    level_cap: int
    n_basis_words: int


def corner_projection_oracle(e: AlgebraElement, word: PoissonWord, weight: Weight, tol: float = 1e-9) -> CornerProjectionReport:
    """Compare :func:`corner_project` with the least-squares projection of the word vector
    onto the span of corner words of degree ``<= len(word)`` on the truncated GNS space."""
    expansion = corner_project(e, word, weight)
    basis = corner_basis(e)
    n = len(word)
    corner_words = [
        PoissonWord(WordKind.EMPTY, tuple(basis[i] for i in combo))
        for r in range(n + 1)
        for combo in itertools.combinations_with_replacement(range(len(basis)), r)
    ]
    norms = max(x.norm() for x in word.letters) ** n if n else 1.0
    M = choose_level_cap(weight.mass, 2 * n, max(norms, 1.0) ** 2, tol)
    space = TruncatedGnsSpace(weight, M)
    b = _WordBuilder(space)
    target = b.build(word)
    cols = np.stack([np.concatenate(b.build(cw).levels) for cw in corner_words], axis=1)
    vec = np.concatenate(target.levels)
    coef, *_ = np.linalg.lstsq(cols, vec, rcond=None)
    projected = cols @ coef
    formula = sum((np.concatenate(b.build(w_).levels) * c for c, w_ in expansion), np.zeros_like(vec))
    return CornerProjectionReport(float(np.linalg.norm(projected - formula)), M, len(corner_words))


# --- independence -----------------------------------------------------------------------------


@dataclass(frozen=True)
class IndependenceReport:
    commutator: float
    factorization: float
    moments: float
    passed: bool


def _random_vector(space: TruncatedGnsSpace, rng) -> TruncatedGnsVector:
    levels = tuple(rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim) for b in space.bases)
    v = TruncatedGnsVector(space, levels)
    return v * (1.0 / v.norm())


def independence_check(
    e: AlgebraElement,
    f: AlgebraElement,
    x: AlgebraElement,
    y: AlgebraElement,
    weight: Weight,
    M: int = 4,
    n_vectors: int = 5,
    seed: int = 0,
    word_length: int = 4,
) -> IndependenceReport:
    """Commutation, state factorization and moment factorization for corner-supported ``x, y``."""
    _check_projection(weight, e)
    _check_projection(weight, f)
    if (e @ f).norm() > 1e-12:
        raise ValueError("projections are not orthogonal")
    if (x - e @ x @ e).norm() > 1e-12 or (y - f @ y @ f).norm() > 1e-12:
        raise ValueError("letters are not supported in their corners")
    for z in (x, y):
        if not z.is_hermitian(atol=1e-10):
            raise ValueError("letters must be Hermitian")
    ux, uy = expi(x), expi(y)
    # (a) commutator of the second quantizations on random truncated vectors
    rng = np.random.default_rng(seed)
    space = TruncatedGnsSpace(weight, M)
    comm = 0.0
    for _ in range(n_vectors):
        v = _random_vector(space, rng)
        a = apply_gamma(ux, apply_gamma(uy, v))
        b = apply_gamma(uy, apply_gamma(ux, v))
        comm = max(comm, (a - b).norm())
    # (b) phi(Gamma(u_x) Gamma(u_y)) = phi(Gamma(u_x u_y))
    joint = np.exp(weight_eval(weight, ux @ uy) - weight.mass)
    fact = abs(joint - characteristic(weight, x) * characteristic(weight, y))
    # (c) interleaved words of lambda(x), lambda(y)
    mom = 0.0
    for pattern in itertools.product((0, 1), repeat=word_length):
        letters = [x if p == 0 else y for p in pattern]
        xs = [z for z in letters if z is x]
        ys = [z for z in letters if z is y]
        lhs = poisson_moment(weight, letters)
        rhs = poisson_moment(weight, xs) * poisson_moment(weight, ys)
        mom = max(mom, abs(lhs - rhs) / max(1.0, abs(rhs)))
    passed = comm <= 1e-10 and fact <= 1e-12 and mom <= 1e-12
    return IndependenceReport(comm, float(fact), mom, passed)


def split_gram_check(
    e: AlgebraElement,
    f: AlgebraElement,
    words_e: Sequence[Sequence[AlgebraElement]],
    words_f: Sequence[Sequence[AlgebraElement]],
    weight: Weight,
) -> float:
    """Max deviation between the Gram of mixed empty words ``lambda_0(a, b)`` and the tensor
    product of corner Grams (``a`` from ``eNe``, ``b`` from ``fNf``, ``e + f = 1``)."""
    _check_projection(weight, e)
    _check_projection(weight, f)
    if not (e + f).allclose(weight.algebra.identity(), atol=1e-12) or (e @ f).norm() > 1e-12:
        raise ValueError("projections must be orthogonal and sum to 1")
    we, ce = restrict_to_corner(weight, e)
    wf, cf = restrict_to_corner(weight, f)
    Ge = np.array([[gram_empty([ce(x) for x in a], [ce(x) for x in b], we) for b in words_e] for a in words_e])
    Gf = np.array([[gram_empty([cf(x) for x in a], [cf(x) for x in b], wf) for b in words_f] for a in words_f])
    mixed = [tuple(a) + tuple(b) for a in words_e for b in words_f]
    G = np.array([[gram_empty(u, v, weight) for v in mixed] for u in mixed])
    return float(np.abs(G - np.kron(Ge, Gf)).max())


def restrict_to_corner(w: Weight, e: AlgebraElement) -> tuple[Weight, Callable[[AlgebraElement], AlgebraElement]]:
    """The corner ``eNe`` as its own algebra, the restricted weight and the compression map."""
    _check_projection(w, e)
    isos, dims = [], []
    for b in e.blocks:
        evals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
        Q = vecs[:, evals > 0.5]
        isos.append(Q)
        dims.append(Q.shape[1])
    keep = [k for k, d in enumerate(dims) if d > 0]
    if not keep:
        raise ValueError("projection is zero")
    alg = Algebra(tuple(dims[k] for k in keep))

    def compress(x: AlgebraElement) -> AlgebraElement:
        return alg.element([isos[k].conj().T @ x.blocks[k] @ isos[k] for k in keep])

    return Weight(compress(w.density)), compress


# --- UCP maps ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class UcpReport:
    weight_residual: float
    cp_defect: float
    state_residual: float
    contraction_defect: float
    gram_defect: float
    passed: bool


def ucp_lift_check(
    T: LinearMapOnAlgebra,
    w_src: Weight,
    w_dst: Weight,
    words: Sequence[Sequence[AlgebraElement]],
    probes: Sequence[AlgebraElement] = (),
    tol: float = 1e-9,
) -> UcpReport:
    """Checks for the lift of a weight-preserving UCP map.

    (a) ``phi_dst(Gamma(T u)) = phi_src(Gamma(u))`` for contractions ``u`` (``probes``, plus
    ``exp(i x)`` for Hermitian parts of word letters).  (b) On the span of the empty words the
    lifted map is a contraction (``G - G_T`` PSD) with PSD image Gram ``G_T``.
    """
    if not T.is_unital():
        raise ValueError("map is not unital")
    cp = T.cp_defect()
    if cp > 1e-10:
        raise ValueError(f"map is not completely positive (Choi defect {cp:.3e})")
    wres = check_weight_preserving(T, w_src, w_dst)
    if wres > tol:
        raise ValueError(f"map is not weight-preserving (residual {wres:.3e})")
    probes = list(probes)
    for word in words:
        for x in word:
            probes.append(expi((x + x.H) * 0.5))
    state = 0.0
    for u in probes:
        lhs = np.exp(weight_eval(w_dst, T(u)) - w_dst.mass)
        rhs = np.exp(weight_eval(w_src, u) - w_src.mass)
        state = max(state, abs(lhs - rhs))
    src_words = [PoissonWord(WordKind.EMPTY, tuple(w)) for w in words]
    dst_words = [lift_on_words(T, pw) for pw in src_words]
    G = gram_matrix(src_words, w_src)
    GT = gram_matrix(dst_words, w_dst)
    herm = lambda A: (A + A.conj().T) / 2
    contraction = max(0.0, -float(np.linalg.eigvalsh(herm(G - GT)).min())) if len(words) else 0.0
    gram = max(0.0, -float(np.linalg.eigvalsh(herm(GT)).min())) if len(words) else 0.0
    passed = state <= 1e-10 and contraction <= tol and gram <= tol
    return UcpReport(wres, cp, float(state), contraction, gram, passed)


# --- JSON -------------------------------------------------------------------------------------


def map_to_json(T: LinearMapOnAlgebra) -> dict:
    from .io import matrix_to_json

    out = {"src": list(T.src.blocks), "dst": list(T.dst.blocks), "matrix": matrix_to_json(T.matrix)}
    if T.dual is not None:
        out["dual"] = matrix_to_json(T.dual.matrix)
    return out


def map_from_json(data: dict) -> LinearMapOnAlgebra:
    """Read ``{"src", "dst", "matrix" | "kraus", ["dual"]}`` (see :mod:`poissonkit.io`)."""
    from .io import matrix_from_json

    try:
        src, dst = Algebra(tuple(data["src"])), Algebra(tuple(data["dst"]))
    except KeyError:
        raise ValueError("map JSON needs 'src' and 'dst' block dimensions") from None
    if "matrix" in data:
        T = LinearMapOnAlgebra(src, dst, matrix_from_json(data["matrix"]))
    elif "kraus" in data:
        T = LinearMapOnAlgebra.kraus(src, dst, [matrix_from_json(k) for k in data["kraus"]])
    else:
        raise ValueError("map JSON needs 'matrix' or 'kraus'")
    if "dual" in data:
        T = T.with_dual(LinearMapOnAlgebra(dst, src, matrix_from_json(data["dual"])))
    return T
