"""Finite-dimensional von Neumann algebras, weights and modular data.

An algebra is a finite direct sum of full matrix blocks ``M_{d_1} + ... + M_{d_k}``.
Elements are stored as tuples of complex block matrices and every operation
acts blockwise.  Weights are given by a positive-definite density ``d`` with
``w(x) = Tr(d x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# relative gap under which density eigenvalues are merged when forming ratio sets
EIGEN_MERGE_RTOL = 1e-12


class DimensionError(ValueError):
    """Raised when elements or weights live on incompatible algebras."""


class FaithfulnessError(ValueError):
    """Raised when a density is not positive definite."""


@dataclass(frozen=True)
class Algebra:
    """Direct sum of full matrix algebras with block sizes ``blocks``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(d) for d in self.blocks)
        if not blocks or any(d < 1 for d in blocks):
            raise ValueError(f"block dimensions must be positive, got {self.blocks!r}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        """Linear dimension ``sum d_k**2``."""
        return sum(d * d for d in self.blocks)

    @property
    def size(self) -> int:
        """Size of the block-diagonal matrix representing an element."""
        return sum(self.blocks)

    def zeros(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.zeros((d, d), complex) for d in self.blocks))

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.eye(d, dtype=complex) for d in self.blocks))

    def scalar(self, c: complex) -> "AlgebraElement":
        return self.identity() * c

    def element(self, blocks: Sequence[np.ndarray] | np.ndarray) -> "AlgebraElement":
        """Wrap raw block matrices (a bare array is accepted for one-block algebras)."""
        if isinstance(blocks, np.ndarray):
            blocks = (blocks,)
        return AlgebraElement(self, tuple(np.asarray(b, dtype=complex) for b in blocks))

    def from_vector(self, vec: np.ndarray) -> "AlgebraElement":
        """Inverse of :meth:`AlgebraElement.to_vector` (row-major per block)."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise DimensionError(f"expected vector of length {self.dim}, got {vec.shape}")
        out, pos = [], 0
        for d in self.blocks:
            out.append(vec[pos:pos + d * d].reshape(d, d))
            pos += d * d
        return AlgebraElement(self, tuple(out))

    def basis(self) -> list["AlgebraElement"]:
        """Matrix units, ordered consistently with :meth:`from_vector`."""
        return [self.from_vector(v) for v in np.eye(self.dim, dtype=complex)]

    def from_full(self, mat: np.ndarray) -> "AlgebraElement":
        """Compress a full ``size x size`` matrix to its diagonal blocks."""
        mat = np.asarray(mat, dtype=complex)
        out, pos = [], 0
        for d in self.blocks:
            out.append(mat[pos:pos + d, pos:pos + d].copy())
            pos += d
        return AlgebraElement(self, tuple(out))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of :class:`Algebra`; immutable, arithmetic is blockwise.

    ``x @ y`` is the algebra product, ``x * c`` scalar multiplication.
    """

    algebra: Algebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != len(self.algebra.blocks):
            raise DimensionError("number of blocks does not match the algebra")
        for b, d in zip(self.blocks, self.algebra.blocks):
            if b.shape != (d, d):
                raise DimensionError(f"block of shape {b.shape} in algebra {self.algebra.blocks}")
            b.setflags(write=False)

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise DimensionError(f"algebras differ: {self.algebra.blocks} vs {other.algebra.blocks}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.blocks))

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            raise TypeError("use @ for the algebra product")
        return AlgebraElement(self.algebra, tuple(a * c for a in self.blocks))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    @property
    def H(self) -> "AlgebraElement":
        """Adjoint."""
        return AlgebraElement(self.algebra, tuple(a.conj().T for a in self.blocks))

    adjoint = H

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def norm(self) -> float:
        """Operator norm: max over blocks of the largest singular value."""
        return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in self.blocks)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(np.allclose(b, b.conj().T, atol=atol) for b in self.blocks)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    def to_full(self) -> np.ndarray:
        """Block-diagonal ``size x size`` matrix."""
        n = self.algebra.size
        out = np.zeros((n, n), complex)
        pos = 0
        for b in self.blocks:
            d = b.shape[0]
            out[pos:pos + d, pos:pos + d] = b
            pos += d
        return out

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return all(np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.blocks, other.blocks))

    def apply(self, func) -> "AlgebraElement":
        """Apply a matrix function blockwise."""
        return AlgebraElement(self.algebra, tuple(np.asarray(func(b), dtype=complex) for b in self.blocks))

    def __repr__(self):
        return f"AlgebraElement(blocks={self.algebra.blocks})"


def hermitian_function(x: AlgebraElement, func) -> AlgebraElement:
    """Apply a scalar function to a Hermitian element through its eigendecomposition."""
    out = []
    for b in x.blocks:
        evals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
        out.append((vecs * func(evals)) @ vecs.conj().T)
    return AlgebraElement(x.algebra, tuple(out))


def expi(x: AlgebraElement) -> AlgebraElement:
    """``exp(i x)`` for Hermitian ``x``."""
    if not x.is_hermitian(atol=1e-10):
        raise ValueError("expi requires a Hermitian element")
    return hermitian_function(x, lambda e: np.exp(1j * e))


@dataclass(frozen=True, eq=False)
class Weight:
    """Faithful positive functional ``x -> Tr(density @ x)``."""

    density: AlgebraElement
    _spectral: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.density.is_hermitian(atol=1e-10):
            raise FaithfulnessError("density must be Hermitian")
        spectral = []
        for b in self.density.blocks:
            evals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
            if evals.min() <= 0:
                raise FaithfulnessError(f"density is not positive definite (min eigenvalue {evals.min():.3e})")
            spectral.append((evals, vecs))
        object.__setattr__(self, "_spectral", tuple(spectral))

    @property
    def algebra(self) -> Algebra:
        return self.density.algebra

    @property
    def mass(self) -> float:
        """``w(1)``."""
        return float(self.density.trace().real)

    @property
    def eigensystems(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per-block ``(eigenvalues, eigenvectors)`` of the density."""
        return self._spectral

    def __call__(self, x: AlgebraElement) -> complex:
        return weight_eval(self, x)

    def scaled(self, c: float) -> "Weight":
        return Weight(self.density * c)

    def power(self, z: complex) -> AlgebraElement:
        """``density**z`` computed in the eigenbasis (z may be complex)."""
        out = [(vecs * np.exp(z * np.log(evals))) @ vecs.conj().T for evals, vecs in self._spectral]
        return AlgebraElement(self.algebra, tuple(out))

    def log(self) -> AlgebraElement:
        out = [(vecs * np.log(evals)) @ vecs.conj().T for evals, vecs in self._spectral]
        return AlgebraElement(self.algebra, tuple(out))

    def sqrt_density(self) -> AlgebraElement:
        return self.power(0.5)

    @cached_property
    def modular(self) -> "ModularData":
        return ModularData.of(self)


def weight_from_density(blocks: Sequence[np.ndarray] | np.ndarray, algebra: Algebra | None = None) -> Weight:
    if isinstance(blocks, np.ndarray):
        blocks = (blocks,)
    if algebra is None:
        algebra = Algebra(tuple(np.asarray(b).shape[0] for b in blocks))
    return Weight(algebra.element(blocks))


def diagonal_weight(*diagonals: Iterable[float]) -> Weight:
    """Weight with diagonal densities, one iterable per block."""
    return weight_from_density([np.diag(np.asarray(list(d), dtype=complex)) for d in diagonals])


def tracial_weight(algebra: Algebra, mass: float = 1.0) -> Weight:
    return Weight(algebra.identity() * (mass / algebra.size))


def _check_same(w: Weight, x: AlgebraElement):
    if x.algebra != w.algebra:
        raise DimensionError(f"element in {x.algebra.blocks}, weight on {w.algebra.blocks}")


def weight_eval(w: Weight, x: AlgebraElement) -> complex:
    """``Tr(d_w x)``."""
    _check_same(w, x)
    return complex(sum(np.sum(d.T * b) for d, b in zip(w.density.blocks, x.blocks)))


def triple_norm(w: Weight, x: AlgebraElement) -> float:
    """``max{||x||, w(x*x)^(1/2), w(xx*)^(1/2), |w(x)|}``."""
    _check_same(w, x)
    return max(
        x.norm(),
        np.sqrt(max(weight_eval(w, x.H @ x).real, 0.0)),
        np.sqrt(max(weight_eval(w, x @ x.H).real, 0.0)),
        abs(weight_eval(w, x)),
    )


def weight_one_norm(w: Weight, x: AlgebraElement) -> float:
    """Upper bound on the factorization norm ``inf{w(a*a)^(1/2) w(b*b)^(1/2): x = a b}``.

    Uses the polar factorization ``x = (u|x|^(1/2)) (|x|^(1/2))``.
    """
    _check_same(w, x)
    left, right = [], []
    for b in x.blocks:
        u, s, vh = np.linalg.svd(b)
        root = np.sqrt(s)
        left.append((u * root) @ vh)       # u |x|^(1/2) in polar form
        right.append((vh.conj().T * root) @ vh)  # |x|^(1/2)
    a = AlgebraElement(x.algebra, tuple(left))
    c = AlgebraElement(x.algebra, tuple(right))
    return float(np.sqrt(weight_eval(w, a.H @ a).real * weight_eval(w, c.H @ c).real))


def triple_norm_weighted(w: Weight, x: AlgebraElement) -> float:
    """Variant of :func:`triple_norm` with the factorization bound in place of ``|w(x)|``."""
    return max(
        x.norm(),
        np.sqrt(max(weight_eval(w, x.H @ x).real, 0.0)),
        np.sqrt(max(weight_eval(w, x @ x.H).real, 0.0)),
        weight_one_norm(w, x),
    )


def _conjugate_by_density(w: Weight, x: AlgebraElement, z: complex) -> AlgebraElement:
    # d^{iz} x d^{-iz}, entrywise in the eigenbasis
    _check_same(w, x)
    out = []
    for (evals, vecs), b in zip(w.eigensystems, x.blocks):
        logs = np.log(evals)
        phase = np.exp(1j * z * (logs[:, None] - logs[None, :]))
        out.append(vecs @ ((vecs.conj().T @ b @ vecs) * phase) @ vecs.conj().T)
    return AlgebraElement(x.algebra, tuple(out))


def modular_flow(w: Weight, x: AlgebraElement, t: float) -> AlgebraElement:
    """``sigma_t(x) = d^{it} x d^{-it}``."""
    return _conjugate_by_density(w, x, float(t))


def modular_flow_complex(w: Weight, x: AlgebraElement, z: complex) -> AlgebraElement:
    """Analytic continuation ``sigma_z`` evaluated exactly in the eigenbasis."""
    return _conjugate_by_density(w, x, complex(z))


def connes_cocycle(rho: Weight, psi: Weight, t: float) -> AlgebraElement:
    """``(D rho : D psi)_t = d_rho^{it} d_psi^{-it}``."""
    if rho.algebra != psi.algebra:
        raise DimensionError("weights live on different algebras")
    return rho.power(1j * t) @ psi.power(-1j * t)


def _merge_values(values: np.ndarray, rtol: float) -> np.ndarray:
    values = np.sort(np.asarray(values, dtype=float))
    merged = [values[0]]
    for v in values[1:]:
        if abs(v - merged[-1]) > rtol * max(abs(v), abs(merged[-1])):
            merged.append(v)
    return np.array(merged)


@dataclass(frozen=True, eq=False)
class ModularData:
    """Eigen-data of a density and the spectrum of the modular operator.

    The modular operator acts on ``L2(N, w)`` as ``a -> d a d^{-1}``, so its
    spectrum is the set of eigenvalue ratios taken inside each block.
    """

    weight: Weight
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]
    spectrum: np.ndarray

    @classmethod
    def of(cls, w: Weight, rtol: float = 1e-10) -> "ModularData":
        evals = tuple(e for e, _ in w.eigensystems)
        vecs = tuple(v for _, v in w.eigensystems)
        ratios = []
        for e in evals:
            e = _merge_values(e, EIGEN_MERGE_RTOL)
            ratios.append((e[:, None] / e[None, :]).ravel())
        spectrum = _merge_values(np.concatenate(ratios), rtol)
        # snap the unit ratio so that membership tests are exact
        spectrum[np.argmin(abs(np.log(spectrum)))] = 1.0
        return cls(w, evals, vecs, spectrum)


@dataclass(frozen=True, eq=False)
class RelativeModularData:
    """Relative modular data of a pair of faithful weights on one algebra."""

    rho: Weight
    psi: Weight

    def __post_init__(self):
        if self.rho.algebra != self.psi.algebra:
            raise DimensionError("weights live on different algebras")

    def relative_modular_operator(self, x: AlgebraElement) -> AlgebraElement:
        """``x -> d_rho x d_psi^{-1}``."""
        return self.rho.density @ x @ self.psi.power(-1.0)

    def inner(self, a: AlgebraElement, b: AlgebraElement) -> complex:
        """``<a, b> = Tr(d_psi a* b)``."""
        return weight_eval(self.psi, a.H @ b)

    def cocycle(self, t: float) -> AlgebraElement:
        return connes_cocycle(self.rho, self.psi, t)

    def cocycle_defect(self, t: float, s: float) -> float:
        """Norm of ``u_{t+s} - u_t sigma^psi_t(u_s)``."""
        lhs = self.cocycle(t + s)
        rhs = self.cocycle(t) @ modular_flow(self.psi, self.cocycle(s), t)
        return (lhs - rhs).norm()
