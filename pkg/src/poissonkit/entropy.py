"""Lindblad relative entropy of weights and relative entropy of the truncated Poisson states.

The truncated Poisson state of a weight ``w`` with density ``d`` lives on the direct sum
``sum_{m <= M} N^{(x) m}`` with density ``e^{-w(1)} d^{(x) m} / m!`` on level ``m``.  Both
truncated states are renormalized by their traces before the entropy is taken.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, DimensionError, FaithfulnessError, Weight, connes_cocycle, weight_eval
from .fock import PoissonWord, WordKind, _WordBuilder
from .gns import TruncatedGnsSpace, apply_gamma, choose_level_cap

EIGEN_FLOOR = 1e-300
DOMINATION_TOL = 1e-12
MAX_KRONECKER_SIZE = 4096


class DominationError(ValueError):
    """``rho <= psi`` fails."""


def _same_algebra(rho: Weight, psi: Weight):
    if rho.algebra != psi.algebra:
        raise DimensionError(f"weights live on different algebras {rho.algebra.blocks} and {psi.algebra.blocks}")


def _check_faithful(w: Weight):
    for evals, _ in w.eigensystems:
        if evals.min() <= 0:
            raise FaithfulnessError("weight has a zero eigenvalue")


def _log_matrix(m: np.ndarray) -> np.ndarray:
    evals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return (vecs * np.log(np.maximum(evals, EIGEN_FLOOR))) @ vecs.conj().T


def _cross(rho: Weight, psi: Weight) -> tuple[float, float]:
    """``(Tr d_rho log d_rho, Tr d_rho log d_psi)``."""
    self_term = 0.0
    cross_term = 0.0
    for (er, vr), (ep, vp) in zip(rho.eigensystems, psi.eigensystems):
        self_term += float(np.sum(er * np.log(np.maximum(er, EIGEN_FLOOR))))
        # Tr(d_rho log d_psi) = sum_ij |<r_i|p_j>|^2 r_i log p_j
        overlap = np.abs(vr.conj().T @ vp) ** 2
        cross_term += float(er @ overlap @ np.log(np.maximum(ep, EIGEN_FLOOR)))
    return self_term, cross_term


def umegaki(p: np.ndarray, q: np.ndarray) -> float:
    """``Tr p (log p - log q)`` for positive matrices (eigenvalues floored at 1e-300)."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    return float(np.real(np.trace(p @ (_log_matrix(p) - _log_matrix(q)))))


def lindblad_entropy(rho: Weight, psi: Weight) -> float:
    """``Tr rho (log rho - log psi) + psi(1) - rho(1)``."""
    _same_algebra(rho, psi)
    _check_faithful(rho)
    _check_faithful(psi)
    s, c = _cross(rho, psi)
    return s - c + psi.mass - rho.mass


def check_domination(rho: Weight, psi: Weight, tol: float = DOMINATION_TOL) -> bool:
    """True iff ``d_psi - d_rho`` is positive semidefinite."""
    _same_algebra(rho, psi)
    diff = psi.density - rho.density
    return all(np.linalg.eigvalsh((b + b.conj().T) / 2).min() >= -tol for b in diff.blocks)


def poisson_kl(a: float, b: float) -> float:
    """KL divergence between Poisson(a) and Poisson(b)."""
    if a <= 0 or b <= 0:
        raise ValueError("intensities must be positive")
    return a * math.log(a / b) + b - a


def _level_log_weights(mass: float, M: int) -> np.ndarray:
    m = np.arange(M + 1)
    return -mass + m * math.log(mass) - np.array([math.lgamma(k + 1) for k in m])


def poisson_relative_entropy(rho: Weight, psi: Weight, M: int) -> float:
    """Relative entropy of the normalized level-``M`` truncations of the two Poisson states.

    Level ``m`` contributes through the tensor structure only, so
    ``Tr P_m log P_m`` reduces to ``p_m (const_m) + (m / a) p_m Tr d_rho log d_rho`` and likewise
    for the cross term, with ``p_m`` the normalized Poisson(a) weights.
    """
    _same_algebra(rho, psi)
    if not check_domination(rho, psi):
        raise DominationError("rho is not dominated by psi")
    _check_faithful(rho)
    _check_faithful(psi)
    if M < 0:
        raise ValueError("M must be nonnegative")
    a, b = rho.mass, psi.mass
    la = _level_log_weights(a, M)
    lb = _level_log_weights(b, M)
    log_za = float(np.logaddexp.reduce(la))
    log_zb = float(np.logaddexp.reduce(lb))
    p = np.exp(la - log_za)
    m = np.arange(M + 1)
    s, c = _cross(rho, psi)
    # log P_m = -a - log m! - log Z_a + sum of log d_rho on each leg (same for psi)
    const = (-a - log_za) - (-b - log_zb)
    per_level = p * const + p * m * (s - c) / a
    return float(per_level.sum())


def poisson_relative_entropy_explicit(rho: Weight, psi: Weight, M: int) -> float:
    """Same quantity from explicit Kronecker-power densities (small ``M`` only)."""
    _same_algebra(rho, psi)
    if not check_domination(rho, psi):
        raise DominationError("rho is not dominated by psi")
    n = rho.algebra.size
    if sum(n ** m for m in range(M + 1)) > MAX_KRONECKER_SIZE:
        raise MemoryError("explicit truncation too large")
    dr, dp = rho.density.to_full(), psi.density.to_full()
    levels_r, levels_p = [], []
    kr = kp = np.ones((1, 1), complex)
    for m in range(M + 1):
        f = math.factorial(m)
        levels_r.append(math.exp(-rho.mass) * kr / f)
        levels_p.append(math.exp(-psi.mass) * kp / f)
        kr, kp = np.kron(kr, dr), np.kron(kp, dp)
    zr = sum(np.trace(x).real for x in levels_r)
    zp = sum(np.trace(x).real for x in levels_p)
    return sum(umegaki(r / zr, q / zp) for r, q in zip(levels_r, levels_p))


@dataclass
class EntropyReport:
    lindblad: float
    levels: list[int]
    values: list[float]
    gaps: list[float]
    rho_mass: float
    psi_mass: float
    renormalization: list[tuple[float, float]] = field(default_factory=list)
    normalized_nonnegative: bool | None = None

    def monotone_after(self, burn_in: int) -> bool:
        tail = [g for M, g in zip(self.levels, self.gaps) if M >= burn_in]
        return all(b <= a + 1e-15 for a, b in zip(tail, tail[1:]))

    def to_json(self) -> dict:
        return {
            "lindblad": self.lindblad,
            "rho_mass": self.rho_mass,
            "psi_mass": self.psi_mass,
            "table": [
                {"M": M, "value": v, "gap": g, "rho_trace": zr, "psi_trace": zp}
                for M, v, g, (zr, zp) in zip(self.levels, self.values, self.gaps, self.renormalization)
            ],
            "normalized_nonnegative": self.normalized_nonnegative,
        }


def truncated_trace(mass: float, M: int) -> float:
    """Trace of the unnormalized level-``M`` truncation, i.e. ``P(Poisson(mass) <= M)``."""
    return float(np.exp(np.logaddexp.reduce(_level_log_weights(mass, M))))


def entropy_report(rho: Weight, psi: Weight, levels: Sequence[int]) -> EntropyReport:
    lin = lindblad_entropy(rho, psi)
    levels = sorted(int(M) for M in levels)
    values = [poisson_relative_entropy(rho, psi, M) for M in levels]
    norm = None
    if abs(rho.mass - 1) < 1e-12 and abs(psi.mass - 1) < 1e-12:
        norm = lin >= -1e-12
    return EntropyReport(
        lindblad=lin,
        levels=levels,
        values=values,
        gaps=[abs(v - lin) for v in values],
        rho_mass=rho.mass,
        psi_mass=psi.mass,
        renormalization=[(truncated_trace(rho.mass, M), truncated_trace(psi.mass, M)) for M in levels],
        normalized_nonnegative=norm,
    )


def cocycle_lift_check(
    rho: Weight, psi: Weight, t: float, letters: Sequence[AlgebraElement], tol: float = 1e-9
) -> float:
    """``|<xi, Gamma(u_t) lambda_0(x) xi> - exp(psi(u_t) - psi(1)) prod psi(u_t x_i)|`` in the
    ``psi``-Poisson GNS space, with ``u_t`` the Connes cocycle of ``rho`` relative to ``psi``."""
    _same_algebra(rho, psi)
    if not check_domination(rho, psi):
        raise DominationError("rho is not dominated by psi")
    u = connes_cocycle(rho, psi, t)
    n = len(letters)
    norms = math.prod(max(x.norm(), 1.0) for x in letters)
    M = choose_level_cap(psi.mass, n, norms, tol)
    space = TruncatedGnsSpace(psi, M)
    v = _WordBuilder(space).build(PoissonWord(WordKind.EMPTY, tuple(letters)))
    lhs = space.vacuum().inner(apply_gamma(u, v))
    rhs = np.exp(weight_eval(psi, u) - psi.mass) * math.prod(weight_eval(psi, u @ x) for x in letters)
    return float(abs(lhs - rhs))
